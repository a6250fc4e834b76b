fn main() {
    println!("bonded: CLI under construction");
}
