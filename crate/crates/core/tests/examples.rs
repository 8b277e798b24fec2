// Every cargo example must run to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(tilde_spectrum);
example!(dpi_chain);
example!(iid_kronecker);
example!(membership);
example!(common_information);
example!(lossless_corner);
example!(region_sweep);
example!(validate_nletter);
example!(grid_oracle);
example!(decoders);
