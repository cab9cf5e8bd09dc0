#pragma once

#include <map>
#include <string>
#include <vector>

#include "mrprior/grid.hpp"

namespace mri {

// Flat key=value recipe with [section] headers. Repeated keys accumulate
// in order (used for method lists).
struct Recipe {
    std::map<std::string, std::vector<std::string>> values; // "section.key" -> values

    static Recipe parse_file(const std::string& path);
    static Recipe parse_text(const std::string& text);

    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_num(const std::string& key, double fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;
};

struct MetricsRow {
    std::string method;
    double accel = 0.0;
    int slice = 0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

struct ExperimentReport {
    std::vector<MetricsRow> rows;
    std::string csv_path;
    std::string table_path;
};

// Executes the declared pipeline (phantom -> coils -> mask -> simulate ->
// methods -> metrics) per acceleration, writing per-method array files,
// PNG magnitude/phase renderings, and the metrics table under out_dir.
ExperimentReport run_experiment(const Recipe& recipe, const std::string& out_dir,
                                uint64_t seed);

} // namespace mri
