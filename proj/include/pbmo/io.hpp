#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "norms.hpp"
#include "operators.hpp"
#include "test_functions.hpp"

namespace pbmo {

using json = nlohmann::json;

/// Shortest-faithful decimal for doubles; stable across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Grid function files.
//
//   PBMO1 N k_1 .. k_N alpha_1 .. alpha_N
//   <one value per line, row-major>        (text)
//
// The binary variant carries the same header line followed by 64-bit IEEE-754
// little-endian values.  Readers try text first and fall back to binary when
// the payload size matches exactly.
// ---------------------------------------------------------------------------

inline void write_grid_function(std::ostream& out, const GridFunction& f, bool binary = false) {
    const Grid& g = f.grid();
    out << "PBMO1 " << g.dims();
    for (int a = 0; a < g.dims(); ++a) out << " " << g.level(a);
    for (int a = 0; a < g.dims(); ++a) out << " " << fmt_double(g.translation(a));
    out << "\n";
    if (binary) {
        for (std::uint64_t c = 0; c < f.size(); ++c) {
            const double v = f[c];
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            char bytes[8];
            for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
            out.write(bytes, 8);
        }
    } else {
        for (std::uint64_t c = 0; c < f.size(); ++c) out << fmt_double(f[c]) << "\n";
    }
    if (!out) throw IoError("write failed");
}

inline void write_grid_function(const std::string& path, const GridFunction& f,
                                bool binary = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_grid_function(out, f, binary);
}

inline GridFunction read_grid_function(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw IoError("missing header line");
    std::istringstream hs(header);
    std::string magic;
    int dims = 0;
    if (!(hs >> magic >> dims) || magic != "PBMO1") throw IoError("bad magic; expected PBMO1");
    if (dims < 1 || dims > kMaxDims) throw IoError("unsupported dimension count");
    std::vector<int> levels(dims);
    for (int a = 0; a < dims; ++a)
        if (!(hs >> levels[a])) throw IoError("truncated header resolutions");
    std::vector<double> alpha(dims);
    for (int a = 0; a < dims; ++a)
        if (!(hs >> alpha[a])) throw IoError("truncated header translations");
    Grid probe(levels);
    Grid grid(levels, alpha_to_numerators(probe, alpha));
    const std::uint64_t cells = grid.cells();

    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // text first
    {
        std::istringstream ps(payload);
        std::vector<double> vals;
        vals.reserve(cells);
        double v;
        while (ps >> v) vals.push_back(v);
        std::string trailing;
        const bool clean = !(ps >> trailing) || trailing.empty();
        if (clean && vals.size() == cells) return GridFunction(grid, std::move(vals));
    }
    if (payload.size() == 8 * cells) {
        std::vector<double> vals(cells);
        for (std::uint64_t c = 0; c < cells; ++c) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[8 * c + i]))
                        << (8 * i);
            std::memcpy(&vals[c], &bits, sizeof(double));
        }
        return GridFunction(grid, std::move(vals));
    }
    throw IoError("payload is neither " + std::to_string(cells) + " text values nor " +
                  std::to_string(8 * cells) + " binary bytes");
}

inline GridFunction read_grid_function(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_grid_function(in);
}

// ---------------------------------------------------------------------------
// Operator matrix files: `PBMOMAT rows cols` then row-major decimal entries.
// ---------------------------------------------------------------------------

inline void write_matrix(std::ostream& out, const OperatorMatrix& m) {
    out << "PBMOMAT " << m.dim << " " << m.dim << "\n";
    for (std::uint64_t r = 0; r < m.dim; ++r) {
        for (std::uint64_t c = 0; c < m.dim; ++c) {
            if (c) out << " ";
            out << fmt_double(m.entry(r, c));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed");
}

inline void write_matrix(const std::string& path, const OperatorMatrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_matrix(out, m);
}

struct DenseMatrix {
    std::uint64_t rows = 0, cols = 0;
    std::vector<double> a;
};

inline DenseMatrix read_matrix(std::istream& in) {
    std::string magic;
    DenseMatrix m;
    if (!(in >> magic >> m.rows >> m.cols) || magic != "PBMOMAT")
        throw IoError("bad magic; expected PBMOMAT");
    m.a.resize(m.rows * m.cols);
    for (auto& v : m.a)
        if (!(in >> v)) throw IoError("truncated matrix payload");
    return m;
}

inline DenseMatrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_matrix(in);
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

inline json grid_to_json(const Grid& g) {
    json j;
    j["dims"] = g.dims();
    j["levels"] = g.levels();
    json shift = json::array();
    for (int a = 0; a < g.dims(); ++a) shift.push_back(g.translation(a));
    j["shift"] = shift;
    return j;
}

inline Grid grid_from_json(const json& j) {
    std::vector<int> levels = j.at("levels").get<std::vector<int>>();
    Grid probe(levels);
    std::vector<double> alpha(levels.size(), 0.0);
    if (j.contains("shift")) alpha = j.at("shift").get<std::vector<double>>();
    return Grid(levels, alpha_to_numerators(probe, alpha));
}

inline json interval_to_json(const DyadicInterval& I) {
    json j;
    j["level"] = I.level;
    j["index"] = I.index;
    if (I.shift_num != 0) j["shift"] = I.shift();
    return j;
}

inline json witness_to_json(const Witness& w) {
    json j;
    switch (w.kind) {
        case Witness::Kind::None:
            j["kind"] = "none";
            break;
        case Witness::Kind::Rectangle: {
            j["kind"] = "rectangle";
            json axes = json::array();
            for (const auto& I : w.rect.axes) axes.push_back(interval_to_json(I));
            j["axes"] = axes;
            break;
        }
        case Witness::Kind::OpenSet: {
            j["kind"] = "open_set";
            j["cells"] = w.cells;
            if (!w.rect.axes.empty()) {
                json axes = json::array();
                for (const auto& I : w.rect.axes) axes.push_back(interval_to_json(I));
                j["enclosing"] = axes;
            }
            break;
        }
        case Witness::Kind::Generation:
            j["kind"] = "generation";
            j["j"] = w.generation;
            break;
        case Witness::Kind::Sample:
            j["kind"] = "sample";
            break;
    }
    if (!w.label.empty()) j["label"] = w.label;
    return j;
}

inline json norm_report_to_json(const NormReport& r) {
    json j;
    j["norm"] = r.norm;
    j["value"] = r.value;
    j["method"] = r.method == SearchMethod::Exact ? "exact" : "heuristic";
    j["witness"] = witness_to_json(r.witness);
    j["grid"] = grid_to_json(r.grid);
    j["resolution"] = r.grid.levels();
    return j;
}

/// Compact comma-free witness token for CSV cells.
inline std::string witness_csv(const Witness& w) {
    std::string s;
    switch (w.kind) {
        case Witness::Kind::None:
            s = "-";
            break;
        case Witness::Kind::Rectangle: {
            s = "rect[";
            for (std::size_t a = 0; a < w.rect.axes.size(); ++a) {
                if (a) s += "x";
                s += std::to_string(w.rect.axes[a].level) + ":" +
                     std::to_string(w.rect.axes[a].index);
            }
            s += "]";
            break;
        }
        case Witness::Kind::OpenSet: {
            s = "cells{";
            for (std::size_t i = 0; i < w.cells.size(); ++i) {
                if (i) s += "|";
                s += std::to_string(w.cells[i]);
            }
            s += "}";
            break;
        }
        case Witness::Kind::Generation: {
            s = "gen(";
            for (std::size_t i = 0; i < w.generation.size(); ++i) {
                if (i) s += ";";
                s += std::to_string(w.generation[i]);
            }
            s += ")";
            break;
        }
        case Witness::Kind::Sample:
            s = "sample";
            break;
    }
    if (!w.label.empty()) {
        std::string clean = w.label;
        for (char& c : clean)
            if (c == ',' || c == '\n') c = ';';
        s += "<" + clean + ">";
    }
    return s;
}

// --- Haar spectra as JSON (nonzero entries, ascending index) ----------------

inline std::string axis_code_label(std::uint32_t code) {
    if (code == HaarSpectrum::kConst) return "const";
    return std::to_string(HaarSpectrum::code_level(code)) + ":" +
           std::to_string(HaarSpectrum::code_index(code));
}

inline json spectrum_to_json(const HaarSpectrum& s) {
    json j;
    j["grid"] = grid_to_json(s.grid());
    json entries = json::array();
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0) continue;
        json e;
        json axes = json::array();
        for (int a = 0; a < s.grid().dims(); ++a) axes.push_back(axis_code_label(s.axis_code(i, a)));
        e["axes"] = axes;
        e["value"] = s[i];
        entries.push_back(std::move(e));
    }
    j["coefficients"] = entries;
    return j;
}

inline HaarSpectrum spectrum_from_json(const json& j) {
    Grid g = grid_from_json(j.at("grid"));
    HaarSpectrum s(g, 0.0);
    for (const auto& e : j.at("coefficients")) {
        const auto axes = e.at("axes").get<std::vector<std::string>>();
        if (static_cast<int>(axes.size()) != g.dims()) throw IoError("axis arity mismatch");
        std::vector<std::uint32_t> codes(axes.size());
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (axes[a] == "const") {
                codes[a] = HaarSpectrum::kConst;
            } else {
                const auto colon = axes[a].find(':');
                if (colon == std::string::npos) throw IoError("bad axis label " + axes[a]);
                const int level = std::stoi(axes[a].substr(0, colon));
                const std::uint32_t index =
                    static_cast<std::uint32_t>(std::stoul(axes[a].substr(colon + 1)));
                if (level < 0 || level >= g.level(static_cast<int>(a)) || index >= (1u << level))
                    throw IoError("axis label outside grid: " + axes[a]);
                codes[a] = HaarSpectrum::code(level, index);
            }
        }
        s[s.linear(codes)] = e.at("value").get<double>();
    }
    return s;
}

// --- recipes -----------------------------------------------------------------

inline json rectangle_to_json(const DyadicRectangle& r) {
    json axes = json::array();
    for (const auto& I : r.axes) {
        json ij;
        ij["level"] = I.level;
        ij["index"] = I.index;
        axes.push_back(std::move(ij));
    }
    return axes;
}

inline DyadicRectangle rectangle_from_json(const json& j) {
    DyadicRectangle r;
    for (const auto& ij : j)
        r.axes.push_back(DyadicInterval{ij.at("level").get<int>(),
                                        ij.at("index").get<std::uint32_t>(), 0, 0});
    return r;
}

inline const char* recipe_kind_name(FunctionRecipe::Kind k) {
    switch (k) {
        case FunctionRecipe::Kind::LogInterval: return "log_interval";
        case FunctionRecipe::Kind::LogRectangle: return "log_rectangle";
        case FunctionRecipe::Kind::Tensor: return "tensor";
        case FunctionRecipe::Kind::Additive: return "additive";
        case FunctionRecipe::Kind::Indicator: return "indicator";
        case FunctionRecipe::Kind::HaarAtom: return "haar_atom";
        case FunctionRecipe::Kind::Random: return "random";
    }
    return "?";
}

inline json recipe_to_json(const FunctionRecipe& r) {
    json j;
    j["kind"] = recipe_kind_name(r.kind);
    switch (r.kind) {
        case FunctionRecipe::Kind::LogInterval:
        case FunctionRecipe::Kind::LogRectangle:
        case FunctionRecipe::Kind::Indicator:
            j["target"] = rectangle_to_json(r.target);
            break;
        case FunctionRecipe::Kind::HaarAtom:
            j["target"] = rectangle_to_json(r.target);
            j["normalized"] = r.normalized;
            break;
        case FunctionRecipe::Kind::Tensor: {
            j["split"] = r.split;
            json parts = json::array();
            for (const auto& p : r.parts) parts.push_back(recipe_to_json(p));
            j["parts"] = parts;
            break;
        }
        case FunctionRecipe::Kind::Additive: {
            json parts = json::array();
            for (const auto& p : r.parts) parts.push_back(recipe_to_json(p));
            j["parts"] = parts;
            break;
        }
        case FunctionRecipe::Kind::Random:
            if (!r.band.empty()) j["band"] = r.band;
            break;
    }
    return j;
}

inline FunctionRecipe recipe_from_json(const json& j) {
    FunctionRecipe r;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "log_interval") r.kind = FunctionRecipe::Kind::LogInterval;
    else if (kind == "log_rectangle") r.kind = FunctionRecipe::Kind::LogRectangle;
    else if (kind == "tensor") r.kind = FunctionRecipe::Kind::Tensor;
    else if (kind == "additive") r.kind = FunctionRecipe::Kind::Additive;
    else if (kind == "indicator") r.kind = FunctionRecipe::Kind::Indicator;
    else if (kind == "haar_atom") r.kind = FunctionRecipe::Kind::HaarAtom;
    else if (kind == "random") r.kind = FunctionRecipe::Kind::Random;
    else throw IoError("unknown recipe kind " + kind);
    if (j.contains("target")) r.target = rectangle_from_json(j.at("target"));
    if (j.contains("normalized")) r.normalized = j.at("normalized").get<bool>();
    if (j.contains("split")) r.split = j.at("split").get<int>();
    if (j.contains("band")) r.band = j.at("band").get<std::vector<int>>();
    if (j.contains("parts"))
        for (const auto& p : j.at("parts")) r.parts.push_back(recipe_from_json(p));
    return r;
}

} // namespace pbmo
