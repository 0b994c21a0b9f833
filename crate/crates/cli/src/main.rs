use clap::Parser;

fn main() {
    let cli = rateless_recon_cli::Cli::parse();
    std::process::exit(rateless_recon_cli::run(&cli));
}
