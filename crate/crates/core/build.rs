fn main() {
    // dgemm backend; the pthread build is selected via the distro alternatives link.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
