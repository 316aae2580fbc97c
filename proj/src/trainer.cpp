#include "nlra/trainer.hpp"

#include <cstdio>
#include <fstream>

namespace nlra {

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string metric_csv(const std::vector<MetricRow> &log, bool include_wall) {
    std::string out = include_wall ? "step,loss,lr,wall_ms\n" : "step,loss,lr\n";
    for (const MetricRow &row : log) {
        out += std::to_string(row.step);
        out += ',';
        out += fmt_g17(row.loss);
        out += ',';
        out += fmt_g17(row.lr);
        if (include_wall) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.3f", row.wall_ms);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_metric_csv(const std::string &path, const std::vector<MetricRow> &log) {
    std::ofstream out(path);
    if (!out) {
        throw FormatError("cannot open '" + path + "' for writing");
    }
    out << metric_csv(log);
}

} // namespace nlra
