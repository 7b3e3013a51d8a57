#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an in-run numeric check fails; carries the name of the first
// failing check.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value configuration (one pair per line, '#' comments). Keys are
// namespaced (model.m, trunc.epsilon, scheme.dt, ...); unknown keys are
// rejected at parse time.
struct ExperimentConfig {
    std::string experiment;
    std::string out_dir;
    int jobs = 1;
    std::map<std::string, std::string> kv;

    static ExperimentConfig from_file(const std::string& experiment, const std::string& path);

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    double getd(const std::string& key, double fallback) const;
    int geti(const std::string& key, int fallback) const;
    std::string gets(const std::string& key, const std::string& fallback) const;
    std::vector<double> getlist(const std::string& key, const std::vector<double>& fallback) const;
};

// Executes one named experiment; writes CSV tables and SVG plots (every
// plot has a sibling CSV with exactly the plotted series) into
// config.out_dir. Returns 0 on success. Throws ConfigError for invalid
// configuration and CheckFailure for a failed in-run assertion.
void run_experiment(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

// CLI entry point shared by the kgman binary and the tests: resolves the
// output directory (--out flag, else KGMAN_OUT, else "./out"), runs the
// experiment and maps errors to exit codes 0/1/2/3.
int run_cli(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, int jobs);

}  // namespace kg
