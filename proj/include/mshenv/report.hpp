#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

namespace mshenv {

using json = nlohmann::json;

struct NodeIssue {
    std::size_t node = 0;
    double h = 0.0;
    double margin = 0.0;
};

// Outcome of a pointwise check over grid nodes. Keeps the worst offenders.
struct CheckReport {
    std::string name;
    bool pass = true;
    std::size_t checked = 0;
    std::size_t failed = 0;
    std::size_t excluded = 0;
    double worst_margin = 0.0;
    std::size_t worst_node = 0;
    double worst_h = 0.0;
    std::vector<NodeIssue> failures;  // up to kKeep, worst first
    json params = json::object();
    std::string note;

    static constexpr std::size_t kKeep = 32;

    void record(std::size_t node, double h, double margin, bool ok) {
        if (checked == 0 || margin < worst_margin) {
            worst_margin = margin;
            worst_node = node;
            worst_h = h;
        }
        ++checked;
        if (ok) return;
        ++failed;
        pass = false;
        failures.push_back({node, h, margin});
        if (failures.size() > 2 * kKeep) trim();
    }

    void trim() {
        std::sort(failures.begin(), failures.end(),
                  [](const NodeIssue& a, const NodeIssue& b) { return a.margin < b.margin; });
        if (failures.size() > kKeep) failures.resize(kKeep);
    }

    json to_json() {
        trim();
        json f = json::array();
        for (const auto& x : failures) f.push_back({{"node", x.node}, {"h", x.h}, {"margin", x.margin}});
        return {{"name", name},           {"pass", pass},         {"checked", checked},
                {"failed", failed},       {"excluded", excluded}, {"worst_margin", worst_margin},
                {"worst_node", worst_node}, {"worst_h", worst_h}, {"failures", f},
                {"params", params},       {"note", note}};
    }
};

}  // namespace mshenv
