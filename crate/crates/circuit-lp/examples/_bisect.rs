use circuit_lp::bench::{generate, Family};
use circuit_lp::report::{run, RunConfig, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let _skip = generate(Family::RandomInt, &mut rng, 0);
    let inst = generate(Family::RandomInt, &mut rng, 1);
    println!("instance {}: {} x {}", inst.name, inst.rows(), inst.cols());
    for i in 0..inst.rows() {
        println!("row {i}: {:?}", inst.a.row(i));
    }
    println!("d = {:?}", inst.d);
    println!("c = {:?}", inst.c);
    let config = RunConfig { mode: Mode::Opt, verify: true, ..RunConfig::default() };
    match run(&inst, &config) {
        Ok(rep) => println!("ok: {}", rep),
        Err(e) => println!("ERR: {e}"),
    }
}
