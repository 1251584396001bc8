#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "regemu/base_object.hpp"
#include "regemu/types.hpp"

namespace regemu {

// Register-row geometry for the read/write emulation:
//   z = floor((n-(f+1))/f)   writers supported per row
//   y = zf + f + 1           full row size
//   m = ceil(k/z)            row count
// Rows 0..m-2 have y registers; the last row has y when z | k and
// (k mod z)*f + f + 1 otherwise (the overflow row for the last k mod z writers).
struct LayoutParams {
    int z = 0;
    int y = 0;
    int m = 0;
    std::vector<int> row_sizes;
};

inline LayoutParams layout_params(const SystemConfig& cfg) {
    cfg.validate();
    const int z = (cfg.n - (cfg.f + 1)) / cfg.f;
    if (z < 1) throw std::invalid_argument("layout_params: n <= 2f leaves z = 0");
    const int y = z * cfg.f + cfg.f + 1;
    const int m = (cfg.k + z - 1) / z;
    LayoutParams lp{z, y, m, {}};
    const int rem = cfg.k % z;
    for (int i = 0; i < m - 1; ++i) lp.row_sizes.push_back(y);
    lp.row_sizes.push_back(rem == 0 ? y : rem * cfg.f + cfg.f + 1);
    return lp;
}

// The mapping delta from object ids to server ids plus the register rows.
// Objects of row R_i sit on pairwise-distinct servers 0..|R_i|-1.
struct Placement {
    std::vector<ServerId> delta;             // indexed by ObjectId
    std::vector<std::vector<ObjectId>> rows;
    std::vector<ObjectKind> kinds;           // indexed by ObjectId
    int n_servers = 0;

    int object_count() const { return static_cast<int>(delta.size()); }

    std::vector<ObjectId> objects_on(ServerId s) const {
        std::vector<ObjectId> out;
        for (ObjectId b = 0; b < object_count(); ++b)
            if (delta[b] == s) out.push_back(b);
        return out;
    }
};

inline Placement build_placement(const SystemConfig& cfg) {
    const LayoutParams lp = layout_params(cfg);
    Placement p;
    p.n_servers = cfg.n;
    ObjectId next = 0;
    for (int size : lp.row_sizes) {
        std::vector<ObjectId> row;
        for (int j = 0; j < size; ++j) {
            p.delta.push_back(static_cast<ServerId>(j));
            p.kinds.push_back(ObjectKind::Register);
            row.push_back(next++);
        }
        p.rows.push_back(std::move(row));
    }
    return p;
}

// One max-register on each of the first 2f+1 servers; quorums of f+1 live
// entirely inside this sub-system so every run uses exactly 2f+1 objects.
inline Placement build_placement_abd(const SystemConfig& cfg) {
    cfg.validate();
    Placement p;
    p.n_servers = cfg.n;
    for (int s = 0; s < 2 * cfg.f + 1; ++s) {
        p.delta.push_back(static_cast<ServerId>(s));
        p.kinds.push_back(ObjectKind::MaxRegister);
    }
    return p;
}

// A single CAS object on server 0.
inline Placement build_placement_cas(const SystemConfig& cfg) {
    cfg.validate();
    Placement p;
    p.n_servers = cfg.n;
    p.delta.push_back(0);
    p.kinds.push_back(ObjectKind::Cas);
    return p;
}

inline nlohmann::ordered_json placement_to_json(const Placement& p) {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : p.rows) doc["rows"].push_back(row);
    nlohmann::ordered_json delta = nlohmann::ordered_json::object();
    for (ObjectId b = 0; b < p.object_count(); ++b)
        delta[std::to_string(b)] = p.delta[b];
    doc["delta"] = std::move(delta);
    return doc;
}

inline void validate_placement(const Placement& p) {
    std::set<ObjectId> seen;
    for (const auto& row : p.rows) {
        std::set<ServerId> servers;
        for (ObjectId b : row) {
            if (b < 0 || b >= p.object_count())
                throw std::logic_error("placement: row references unknown object");
            if (!seen.insert(b).second)
                throw std::logic_error("placement: rows are not disjoint");
            if (!servers.insert(p.delta[b]).second)
                throw std::logic_error("placement: row objects share a server");
        }
    }
}

} // namespace regemu
