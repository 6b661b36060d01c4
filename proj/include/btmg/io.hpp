// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_IO_HPP
#define BTMG_IO_HPP

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "btmg/analysis.hpp"
#include "btmg/mgm.hpp"

namespace btmg {

inline nlohmann::json to_json(const SolveReport& rep) {
    nlohmann::json j;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["residual_history"] = rep.residual_history;
    if (rep.final_error_a_norm) j["final_error_a_norm"] = *rep.final_error_a_norm;
    if (!rep.error_a_history.empty()) j["error_a_history"] = rep.error_a_history;
    return j;
}

inline nlohmann::json to_json(const ConditioningReport& rep) {
    nlohmann::json j;
    j["z"] = rep.z;
    j["limit_flag"] = rep.limit_flag == LimitFlag::vanishing ? "vanishing" : "bounded_away";
    j["levels"] = nlohmann::json::array();
    for (const auto& r : rep.rows) {
        nlohmann::json e;
        e["j"] = r.j;
        e["lambda_pp0"] = r.lambda_pp0;
        e["lambda_max_sup"] = r.lambda_max_sup;
        e["kappa"] = r.kappa;
        j["levels"].push_back(std::move(e));
    }
    return j;
}

inline nlohmann::json to_json(const ConditionCheckReport& rep) {
    nlohmann::json j;
    j["theta0"] = rep.theta0;
    j["cond2_sup"] = rep.cond2_sup;
    j["cond2_sup_coarse_grid"] = rep.cond2_sup_coarse;
    j["cond3_min"] = rep.cond3_min;
    j["cond4_max"] = rep.cond4_max;
    j["passed"] = {rep.passed2, rep.passed3, rep.passed4};
    return j;
}

/// One row of an iteration-count table: t, n, N, then one count per z.
/// count < 0 encodes the "max_iter+" sentinel of non-converged runs.
struct CountRow {
    int t = 0;
    int n = 0;
    long long N = 0;
    std::vector<int> counts;
};

inline std::string format_count(int c, int max_iter = 4000) {
    if (c < 0 || c >= max_iter) return std::to_string(max_iter) + "+";
    return std::to_string(c);
}

inline std::string counts_to_csv(const std::vector<CountRow>& rows, int zmax, int max_iter = 4000,
                                 const std::vector<CountRow>* expected = nullptr) {
    std::ostringstream os;
    os << "t,n,N";
    for (int z = 1; z <= zmax; ++z) os << ",z" << z;
    if (expected) os << ",diff";
    os << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        os << row.t << "," << row.n << "," << row.N;
        for (int c : row.counts) os << "," << format_count(c, max_iter);
        if (expected) {
            // max absolute deviation over the z columns; sentinel cells agree
            // iff both sides hit the cap
            int diff = 0;
            bool sentinel_mismatch = false;
            const auto& exp_row = (*expected)[r];
            for (std::size_t c = 0; c < row.counts.size() && c < exp_row.counts.size(); ++c) {
                const bool got_cap = row.counts[c] < 0 || row.counts[c] >= max_iter;
                const bool want_cap = exp_row.counts[c] < 0 || exp_row.counts[c] >= max_iter;
                if (got_cap != want_cap)
                    sentinel_mismatch = true;
                else if (!got_cap)
                    diff = std::max(diff, std::abs(row.counts[c] - exp_row.counts[c]));
            }
            if (sentinel_mismatch)
                os << ",sentinel-mismatch";
            else
                os << "," << diff;
        }
        os << "\n";
    }
    return os.str();
}

inline std::string conditioning_to_csv(const std::vector<ConditioningReport>& reports) {
    std::ostringstream os;
    os << "j";
    for (const auto& r : reports) os << ",z" << r.z;
    os << "\n";
    if (reports.empty()) return os.str();
    const std::size_t levels = reports.front().rows.size();
    os << std::setprecision(6);
    for (std::size_t j = 0; j < levels; ++j) {
        os << reports.front().rows[j].j;
        for (const auto& r : reports) os << "," << r.rows[j].kappa;
        os << "\n";
    }
    return os.str();
}

}  // namespace btmg

#endif  // BTMG_IO_HPP
