#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dnsys/pipeline.hpp"
#include "dnsys/types.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dnsys: parameter-elliptic DN systems, parametrices and functional calculus"};
    std::string command, config, out = "dnsys_out";
    std::uint64_t seed = 0;
    bool stamp = false, print_config = false;
    app.add_option("command", command, "pipeline to run when no config is given")
        ->check(CLI::IsMember(dnsys::pipeline_commands()));
    app.add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_flag("--stamp", stamp, "add timestamps to report and CSV headers");
    app.add_flag("--print-config", print_config, "print the built-in config for the command and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    dnsys::RunOptions opts;
    opts.out_dir = out;
    opts.stamp = stamp;
    if (*seed_opt) opts.seed = seed;

    dnsys::RunOutcome r;
    try {
        if (print_config) {
            if (command.empty()) throw dnsys::Error(dnsys::ErrorKind::input, "--print-config needs a command");
            std::cout << dnsys::default_config(command) << "\n";
            return 0;
        }
        if (!config.empty()) {
            r = dnsys::run_config_file(config, opts);
        } else if (!command.empty()) {
            r = dnsys::run_config_text(dnsys::default_config(command), opts);
        } else {
            std::cerr << "either a command or --config is required\n" << app.help();
            return 2;
        }
    } catch (const dnsys::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dnsys::exit_code_for(e.kind());
    }
    std::cout << r.status;
    if (!r.message.empty()) std::cout << ": " << r.message;
    std::cout << "\n";
    for (const auto& f : r.files) std::cout << "  " << out << "/" << f << "\n";
    return r.exit_code;
}
