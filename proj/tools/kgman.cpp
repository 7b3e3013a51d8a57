#include <string>

#include "CLI11.hpp"
#include "kg/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"kgman - nonlinear wave experiment runner"};
    std::string experiment, config, out;
    int jobs = 1;
    app.add_option("experiment", experiment, "experiment name")->required();
    app.add_option("--config", config, "key=value config file")->required();
    app.add_option("--out", out, "output directory (default: $KGMAN_OUT, else ./out)");
    app.add_option("--jobs", jobs, "parallel sweep workers")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // normalize usage errors
    }
    return kg::run_cli(experiment, config, out, jobs);
}
