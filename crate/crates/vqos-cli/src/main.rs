fn main() {
    println!("vqos");
}
