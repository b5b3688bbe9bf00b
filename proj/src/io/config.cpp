#include <cmath>
#include <set>

#include "ctwpc/errors.hpp"
#include "ctwpc/io.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path, message);
}

double number(const json& doc, const std::string& key, const std::string& where) {
    const auto& v = doc.at(key);
    if (!v.is_number()) fail(where + "." + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(where + "." + key, "must be finite");
    return x;
}

std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
}

}  // namespace

LineSpec line_spec_from_json(const json& doc, const std::string& where) {
    if (!doc.is_object()) fail(where, "expected an object");
    static const std::set<std::string> known = {"preset",  "l_j_nH",  "c_g_pF",  "c_i_pF",
                                                "plasma_ghz", "c_j_fF", "n_cells", "defects",
                                                "disorder_halfwidth", "seed"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) fail(where + "." + key, "unknown key");

    CellParams base = presets::fitted_cell();
    if (doc.contains("preset")) {
        const auto& p = doc.at("preset");
        if (p == "fitted") base = presets::fitted_cell();
        else if (p == "design") base = presets::design_cell();
        else fail(where + ".preset", "expected \"fitted\" or \"design\"");
    }
    const double L = doc.contains("l_j_nH") ? number(doc, "l_j_nH", where) * kNano : base.L_J;
    const double Cg = doc.contains("c_g_pF") ? number(doc, "c_g_pF", where) * kPico : base.C_g;
    const double Ci = doc.contains("c_i_pF") ? number(doc, "c_i_pF", where) * kPico : base.C_i;
    if (doc.contains("plasma_ghz") && doc.contains("c_j_fF"))
        fail(where, "give either plasma_ghz or c_j_fF, not both");
    LineSpec spec;
    if (doc.contains("c_j_fF")) {
        spec.cell = CellParams::from_junction_capacitance(L, Cg, Ci, number(doc, "c_j_fF", where) * kFemto);
    } else {
        const double f = doc.contains("plasma_ghz") ? number(doc, "plasma_ghz", where) : presets::kDefaultPlasmaGHz;
        if (!(f > 0.0)) fail(where + ".plasma_ghz", "must be positive");
        spec.cell = CellParams::from_plasma_frequency(L, Cg, Ci, ghz_to_rad(f));
    }
    if (doc.contains("n_cells")) spec.n_cells = static_cast<int>(integer(doc.at("n_cells"), where + ".n_cells"));
    if (doc.contains("defects")) {
        const auto& d = doc.at("defects");
        if (!d.is_array()) fail(where + ".defects", "expected an array");
        for (std::size_t i = 0; i < d.size(); ++i) {
            const std::string path = where + ".defects[" + std::to_string(i) + "]";
            Defect def;
            if (d[i].is_object()) {
                if (!d[i].contains("cell")) fail(path + ".cell", "missing");
                def.cell_index = static_cast<int>(integer(d[i].at("cell"), path + ".cell"));
                if (d[i].contains("kind") && d[i].at("kind") != "open_junction")
                    fail(path + ".kind", "only \"open_junction\" is supported");
            } else {
                def.cell_index = static_cast<int>(integer(d[i], path));
            }
            spec.defects.push_back(def);
        }
    }
    if (doc.contains("disorder_halfwidth")) spec.disorder_halfwidth = number(doc, "disorder_halfwidth", where);
    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            fail(where + ".seed", "expected a non-negative integer");
        spec.seed = s.get<std::uint64_t>();
    }

    const auto result = validate(spec);
    if (!result.ok()) fail(where + "." + result.violations.front().path, result.violations.front().message);
    return result.spec;
}

json line_spec_to_json(const LineSpec& spec) {
    json defects = json::array();
    for (const auto& d : spec.defects) defects.push_back({{"cell", d.cell_index}, {"kind", "open_junction"}});
    return {{"l_j_nH", spec.cell.L_J / kNano},
            {"c_g_pF", spec.cell.C_g / kPico},
            {"c_i_pF", spec.cell.C_i / kPico},
            {"c_j_fF", spec.cell.C_J / kFemto},
            {"n_cells", spec.n_cells},
            {"defects", defects},
            {"disorder_halfwidth", spec.disorder_halfwidth},
            {"seed", spec.seed}};
}

std::string canonical(const json& doc) { return doc.dump(); }

}  // namespace ctwpc::io
