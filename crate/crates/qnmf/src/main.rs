use clap::Parser;

fn main() {
    let cli = qnmf::cli::Cli::parse();
    match qnmf::cli::run(cli) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
