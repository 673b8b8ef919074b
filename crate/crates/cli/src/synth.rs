use std::path::PathBuf;

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synthkit_core::synth::write_synthetic_dump;

#[derive(clap::Args)]
pub struct Args {
    pub dump_root: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub frames: u64,
    #[arg(long, default_value_t = 20)]
    pub objects: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
}

pub fn run(args: Args, json: bool) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    write_synthetic_dump(&args.dump_root, &mut rng, args.frames, args.objects, (args.width, args.height))?;
    if json {
        println!("{}", serde_json::json!({ "dump_root": args.dump_root, "frames": args.frames }));
    } else {
        println!("wrote {} frames to {}", args.frames, args.dump_root.display());
    }
    Ok(())
}
