fn main() {
    // LAPACK symbols used through lax come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=openblas");
}
