#include "nlra/layout.hpp"

#include <fstream>
#include <sstream>

#include "nlra/errors.hpp"

namespace nlra {

ModelLayout load_layout(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open layout file '" + path + "'");
    }
    ModelLayout layout;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        LayoutSite site;
        if (!(fields >> site.name)) {
            continue; // blank or comment-only line
        }
        if (!(fields >> site.m >> site.n) || site.m == 0 || site.n == 0) {
            throw FormatError("layout file '" + path + "' line " + std::to_string(lineno) +
                              ": expected \"name m n\" with positive dims");
        }
        layout.sites.push_back(std::move(site));
    }
    return layout;
}

std::uint64_t site_trainable_params(std::size_t m, std::size_t n, const AdapterConfig &config) {
    const std::uint64_t r = config.rank;
    if (config.train_mask == TrainMask::intermediate_only) {
        if (config.variant == Variant::lora) {
            throw ConfigError("train_mask intermediate_only requires slora or nlora");
        }
        return r * r;
    }
    std::uint64_t count = r * (static_cast<std::uint64_t>(m) + n);
    if (config.variant != Variant::lora) {
        count += r * r;
    }
    return count;
}

std::uint64_t trainable_params(const ModelLayout &layout, const AdapterConfig &config) {
    std::uint64_t total = 0;
    for (const auto &site : layout.sites) {
        total += site_trainable_params(site.m, site.n, config);
    }
    return total;
}

} // namespace nlra
