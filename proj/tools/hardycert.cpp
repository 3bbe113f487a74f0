#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hardycert/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hardycert: certify and estimate weighted Poincare and Hardy inequalities"};
    std::string config;
    std::string out;
    app.add_option("config", config, "JSON run config (- for stdin)")->required();
    app.add_option("-o,--out", out, "output directory (overrides config.output)");
    CLI11_PARSE(app, argc, argv);

    std::stringstream text;
    if (config == "-") {
        text << std::cin.rdbuf();
    } else {
        std::ifstream f(config);
        if (!f) {
            std::cerr << "hardycert: cannot read " << config << "\n";
            return hardycert::cli::BadConfig;
        }
        text << f.rdbuf();
    }
    std::optional<std::string> override_dir;
    if (!out.empty()) override_dir = out;
    return hardycert::cli::run(text.str(), override_dir);
}
