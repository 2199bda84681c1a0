#pragma once

#include "ipnv/contacts.hpp"
#include "ipnv/scenario_io.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>

namespace ipnv {

/// Node id -> positive ION/HDTN node number; injective.
using NodeNumberMap = std::map<std::string, std::uint64_t>;

/// Honors `overrides`, then numbers the remaining nodes in declaration
/// order with the smallest unused positive integers. Throws ValidationError
/// on a duplicate or zero override target or an override for an unknown node.
NodeNumberMap build_node_map(const ScenarioConfig& config, const std::map<std::string, std::uint64_t>& overrides = {});

struct ExportOptions {
    Epoch reference_epoch{}; ///< time zero of exported relative times
    double data_rate = 1000.0; ///< bytes per second
    bool emit_ranges = true;

    void validate() const;
};

/// ionrc text: `a contact` lines (one per window) followed by `a range`
/// lines (one per unordered pair and window span). `owlts[i]` is the OWLT of
/// plan[i] in seconds. Relative times use floor(start) and ceil(end).
std::string export_ion(const ContactPlan& plan, std::span<const double> owlts, const NodeNumberMap& map,
                       const ExportOptions& options);

/// HDTN contact-plan JSON with the same contact ordering as export_ion.
std::string export_hdtn(const ContactPlan& plan, std::span<const double> owlts, const NodeNumberMap& map,
                        const ExportOptions& options);

/// Per-window maximum OWLT for a bundle's plan, in plan order.
std::vector<double> plan_owlts(const ScenarioBundle& bundle);

} // namespace ipnv
