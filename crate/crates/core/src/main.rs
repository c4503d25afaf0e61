fn main() {
    std::process::exit(dfs_forge::cli::main_from_args(std::env::args_os()));
}
