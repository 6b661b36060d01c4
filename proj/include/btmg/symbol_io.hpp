// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_SYMBOL_IO_HPP
#define BTMG_SYMBOL_IO_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "btmg/symbol.hpp"

namespace btmg {

/// JSON schema:
/// {"levels":1,"d":2,"hermitian":true,
///  "coeffs":[{"offset":[0],"re":[[...]],"im":[[...]]}, ...]}
/// "im" may be omitted for real coefficients. The loader rejects malformed
/// blocks, duplicate offsets, and hermitian-flag violations.
inline MatrixSymbol symbol_from_json(const nlohmann::json& j) {
    if (!j.contains("levels") || !j.contains("d") || !j.contains("coeffs"))
        throw std::invalid_argument("symbol_from_json: missing levels/d/coeffs");
    const int levels = j.at("levels").get<int>();
    const int d = j.at("d").get<int>();
    const bool hermitian = j.value("hermitian", false);
    if (levels < 1 || d < 1) throw std::invalid_argument("symbol_from_json: bad levels or d");
    MatrixSymbol::CoeffMap coeffs;
    for (const auto& entry : j.at("coeffs")) {
        MultiIndex off = entry.at("offset").get<std::vector<int>>();
        if (static_cast<int>(off.size()) != levels)
            throw std::invalid_argument("symbol_from_json: offset arity mismatch");
        const auto& re = entry.at("re");
        if (static_cast<int>(re.size()) != d)
            throw std::invalid_argument("symbol_from_json: coefficient is not d x d");
        DenseMatrix a(d, d);
        for (int r = 0; r < d; ++r) {
            if (static_cast<int>(re.at(r).size()) != d)
                throw std::invalid_argument("symbol_from_json: coefficient is not d x d");
            for (int c = 0; c < d; ++c) a(r, c) = cxd(re.at(r).at(c).get<double>(), 0.0);
        }
        if (entry.contains("im")) {
            const auto& im = entry.at("im");
            if (static_cast<int>(im.size()) != d)
                throw std::invalid_argument("symbol_from_json: im block is not d x d");
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    a(r, c) += cxd(0.0, im.at(r).at(c).get<double>());
        }
        if (coeffs.count(off))
            throw std::invalid_argument("symbol_from_json: duplicate offset");
        coeffs.emplace(std::move(off), std::move(a));
    }
    return MatrixSymbol(levels, d, std::move(coeffs), hermitian);
}

inline nlohmann::json symbol_to_json(const MatrixSymbol& sym) {
    nlohmann::json j;
    j["levels"] = sym.levels();
    j["d"] = sym.block_size();
    j["hermitian"] = sym.hermitian();
    j["coeffs"] = nlohmann::json::array();
    for (const auto& [off, a] : sym.coeffs()) {
        nlohmann::json e;
        e["offset"] = off;
        std::vector<std::vector<double>> re(sym.block_size()), im(sym.block_size());
        bool any_im = false;
        for (int r = 0; r < sym.block_size(); ++r)
            for (int c = 0; c < sym.block_size(); ++c) {
                re[r].push_back(a(r, c).real());
                im[r].push_back(a(r, c).imag());
                any_im = any_im || a(r, c).imag() != 0.0;
            }
        e["re"] = re;
        if (any_im) e["im"] = im;
        j["coeffs"].push_back(std::move(e));
    }
    return j;
}

inline MatrixSymbol load_symbol_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_symbol_file: cannot open " + path);
    nlohmann::json j;
    is >> j;
    return symbol_from_json(j);
}

inline void save_symbol_file(const MatrixSymbol& sym, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_symbol_file: cannot open " + path);
    os << symbol_to_json(sym).dump(1) << "\n";
}

}  // namespace btmg

#endif  // BTMG_SYMBOL_IO_HPP
