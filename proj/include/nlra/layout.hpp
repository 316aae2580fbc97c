#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlra/adapters.hpp"

namespace nlra {

/// One adapter site: a named dense layer of shape m x n.
struct LayoutSite {
    std::string name;
    std::size_t m = 0;
    std::size_t n = 0;
};

/// Declarative list of the dense layers an adapter family attaches to.
/// Checkpoint loading for real models is out of scope; layouts exist for
/// parameter accounting.
struct ModelLayout {
    std::vector<LayoutSite> sites;
};

/// Parses "name m n" lines; '#' starts a comment, blank lines are skipped.
ModelLayout load_layout(const std::string &path);

/// Trainable parameters across all sites:
///   lora                     r (m + n)
///   slora / nlora, mask all  r (m + n) + r^2
///   mask intermediate_only   r^2
std::uint64_t trainable_params(const ModelLayout &layout, const AdapterConfig &config);

/// Trainable parameters of one site under the config.
std::uint64_t site_trainable_params(std::size_t m, std::size_t n, const AdapterConfig &config);

} // namespace nlra
