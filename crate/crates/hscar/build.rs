// lapack-sys declares the symbols only; link the system reference libraries.
fn main() {
    println!("cargo:rustc-link-lib=lapack");
    println!("cargo:rustc-link-lib=blas");
}
