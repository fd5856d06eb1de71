// SPDX-License-Identifier: Apache-2.0

fn main() {
    let args: Vec<String> = std::env::args_os().map(|a| a.to_string_lossy().into_owned()).collect();
    let (code, out) = mke::cli::run(&args);
    print!("{out}");
    std::process::exit(code);
}
