macro_rules! example_test {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(encode_spin, "encode_spin.rs");
example_test!(special_functions, "special_functions.rs");
example_test!(wigner_rotation, "wigner_rotation.rs");
example_test!(rotation_twirl, "rotation_twirl.rs");
example_test!(boost_twirl, "boost_twirl.rs");
example_test!(fisher_information, "fisher_information.rs");
example_test!(qfi_surface, "qfi_surface.rs");
example_test!(t2_curve, "t2_curve.rs");
example_test!(validate, "validate.rs");
