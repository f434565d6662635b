#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dupin/classify.hpp"
#include "dupin/errors.hpp"
#include "dupin/liesphere.hpp"

// JSON and CSV interchange.
//
// Transformations travel as
//
//   { "signature": "lie(3)",            // tag of the preserved form
//     "matrix":    [[...], ...],        // row-major, (d+3) x (d+3)
//     "kind_hint": "parallel_spherical",// advisory; matrix is authoritative
//     "t":         0.3 }                // parameter of the parallel kinds
//
// and classification reports as the schema assembled in report_json below.
// All emitters use ordered_json so reruns with one seed are byte-identical.

namespace dupin {

inline constexpr int schema_version = 1;

using json = nlohmann::ordered_json;

// ---- matrices and transformations --------------------------------------

inline json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty())
        throw invalid_input("matrix_from_json: expected a non-empty array of rows");
    const auto nrows = rows.size();
    const auto ncols = rows[0].is_array() ? rows[0].size() : 0;
    if (ncols == 0) throw invalid_input("matrix_from_json: expected non-empty rows");
    Eigen::MatrixXd m(static_cast<int>(nrows), static_cast<int>(ncols));
    for (std::size_t i = 0; i < nrows; ++i) {
        if (!rows[i].is_array() || rows[i].size() != ncols)
            throw invalid_input("matrix_from_json: ragged rows");
        for (std::size_t j = 0; j < ncols; ++j) {
            if (!rows[i][j].is_number())
                throw invalid_input("matrix_from_json: non-numeric entry");
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
        }
    }
    return m;
}

inline Signature signature_from_string(const std::string& s) {
    for (SignatureKind kind : {SignatureKind::Lie, SignatureKind::Mobius}) {
        const std::string prefix = kind == SignatureKind::Lie ? "lie(" : "mobius(";
        if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
            try {
                const int d = std::stoi(s.substr(prefix.size(),
                                                 s.size() - prefix.size() - 1));
                if (d >= 1) return {kind, d};
            } catch (const std::exception&) {
            }
        }
    }
    throw invalid_input("signature_from_string: bad signature tag '" + s + "'");
}

inline json lie_json(const LieTransformation& g) {
    json j;
    j["signature"] = g.map.sig.str();
    j["matrix"] = matrix_json(g.map.mat);
    j["kind_hint"] = lie_kind_name(g.kind);
    j["t"] = g.t;
    return j;
}

inline LieTransformation lie_from_json(const json& j) {
    if (!j.is_object() || !j.contains("signature") || !j.contains("matrix"))
        throw invalid_input("lie_from_json: expected {signature, matrix, ...}");
    const Signature sig = signature_from_string(j["signature"].get<std::string>());
    if (sig.kind != SignatureKind::Lie)
        throw invalid_input("lie_from_json: transformation must carry a lie(d) signature");
    const Eigen::MatrixXd m = matrix_from_json(j["matrix"]);
    LieTransformation g;
    g.map = OrthogonalMap(sig, m);  // validates shape and the preserved form
    g.kind = j.contains("kind_hint") ? lie_kind_from_name(j["kind_hint"].get<std::string>())
                                     : LieKind::General;
    g.t = j.contains("t") ? j["t"].get<double>() : 0.0;
    return g;
}

inline LieTransformation load_lie(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("load_lie: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_input("load_lie: " + path + ": " + e.what());
    }
    return lie_from_json(j);
}

inline json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json sphere_json(const OrientedSphere& s) {
    json j;
    j["center"] = vector_json(s.center);
    j["signed_radius"] = s.signed_radius;
    return j;
}

// ---- classification reports --------------------------------------------

inline json witness_json(const Witness& w) {
    json j;
    j["point"] = vector_json(w.point);
    j["normal"] = vector_json(w.normal);
    j["residual"] = w.residual;
    if (!w.detail.empty()) j["detail"] = w.detail;
    return j;
}

inline json verdict_entry_json(const VerdictEntry& e) {
    json j;
    j["verdict"] = verdict_name(e.verdict);
    j["residual"] = e.residual;
    j["tol"] = e.tol;
    if (!e.reason.empty()) j["reason"] = e.reason;
    if (e.witness) j["witness"] = witness_json(*e.witness);
    return j;
}

// Plans built by make_plan are reproduced exactly by the echoed sizes and
// seed, so the echo stays small.
inline json plan_json(const SamplePlan& plan) {
    json j;
    j["points"] = plan.point_grid.size();
    j["normals_per_point"] = plan.normal_grid.empty() ? 0 : plan.normal_grid[0].size();
    j["curves_per_point"] = plan.curve_count;
    j["curve_length"] = plan.curve_length;
    j["seed"] = plan.seed;
    return j;
}

inline json report_json(const ClassificationReport& r, const SamplePlan& plan) {
    json j;
    j["schema_version"] = schema_version;
    j["chart"] = r.chart_name;
    j["n"] = r.n;
    j["p"] = r.p;
    j["plan"] = plan_json(plan);
    j["cluster_tol"] = r.cluster_tol;
    j["constancy_tol"] = r.constancy_tol;

    if (r.k_varies)
        j["k"] = "varies";
    else if (r.k_observed > 0)
        j["k"] = r.k_observed;
    j["weak_k"] = r.weak_k;
    if (!r.multiplicities.empty()) j["multiplicities"] = r.multiplicities;
    j["constancy_residual"] = r.constancy_residual;
    if (r.shared_value_detected) {
        j["shared_value"] = r.shared_value;
        j["opposite_pair_residual"] = r.opposite_pair_residual;
    }
    if (r.antipodal_residual) j["antipodal_residual"] = *r.antipodal_residual;
    if (r.truncated_curves > 0) j["truncated_curves"] = r.truncated_curves;

    // The summary view: verdict name -> passed.  Tri-state detail follows.
    json verdicts, checks;
    auto add = [&](const std::string& name, const VerdictEntry& e) {
        if (!e.evaluated) return;
        verdicts[name] = e.verdict == Verdict::pass;
        checks[name] = verdict_entry_json(e);
    };
    const std::string k_label = r.k_varies ? "k" : std::to_string(r.weak_k);
    add(k_label + "-umbilical", r.umbilical);
    add("weakly-" + k_label + "-umbilical", r.weakly_umbilical);
    add("unipotent", r.unipotent);
    add("cpc", r.cpc);
    add("dupin", r.dupin);
    j["verdicts"] = std::move(verdicts);
    j["checks"] = std::move(checks);
    j["nesting_consistent"] = r.nesting_consistent;
    return j;
}

// ---- CSV ---------------------------------------------------------------

// Plot-ready tables: one comma-separated row per call, doubles at full
// round-trip precision.  Fields here never need quoting.
inline void csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

inline std::string csv_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace dupin
