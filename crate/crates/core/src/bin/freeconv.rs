// SPDX-License-Identifier: Apache-2.0

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let outcome = freeconv::cli::run_command(&argv);
    std::process::exit(outcome.exit_code);
}
