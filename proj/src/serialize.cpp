#include <bandex/serialize.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bandex
{

namespace
{

const Json& require(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string("json: missing field '") + key + "'");
    }
    return j.at(key);
}

// JSON has no NaN or infinity; encode them as strings.
Json number_to_json(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

} // namespace

Json complex_to_json(Complex z)
{
    return Json::array({z.real(), z.imag()});
}

Complex complex_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 2) {
        throw std::invalid_argument("json: complex value must be [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json cvector_to_json(const CVector& v)
{
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(complex_to_json(v(i)));
    }
    return out;
}

CVector cvector_from_json(const Json& j)
{
    if (!j.is_array()) {
        throw std::invalid_argument("json: expected an array of [re, im] pairs");
    }
    CVector out(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        out(static_cast<Index>(i)) = complex_from_json(j[i]);
    }
    return out;
}

Json to_json(const GridSpec& grid)
{
    return {{"refinement", grid.refinement}, {"rayleigh_span", grid.rayleigh_span}};
}

GridSpec grid_from_json(const Json& j)
{
    GridSpec g;
    g.refinement    = require(j, "refinement").get<int>();
    g.rayleigh_span = require(j, "rayleigh_span").get<double>();
    g.columns(); // validates
    return g;
}

Json to_json(const SparseSignal& x, std::optional<std::uint64_t> seed)
{
    Json j = {{"support", x.support},
              {"amplitudes", cvector_to_json(x.amplitudes)},
              {"grid", to_json(x.grid)}};
    if (seed) {
        j["seed"] = *seed;
    }
    return j;
}

SparseSignal signal_from_json(const Json& j)
{
    SparseSignal x;
    x.support    = require(j, "support").get<IndexSet>();
    x.amplitudes = cvector_from_json(require(j, "amplitudes"));
    x.grid       = grid_from_json(require(j, "grid"));
    x.validate();
    return x;
}

Json to_json(const OffGridScene& scene, std::optional<std::uint64_t> seed)
{
    Json j = {{"frequencies", scene.frequencies},
              {"amplitudes", cvector_to_json(scene.amplitudes)},
              {"span", scene.span}};
    if (seed) {
        j["seed"] = *seed;
    }
    return j;
}

OffGridScene scene_from_json(const Json& j)
{
    OffGridScene s;
    s.frequencies = require(j, "frequencies").get<std::vector<double>>();
    s.amplitudes  = cvector_from_json(require(j, "amplitudes"));
    s.span        = require(j, "span").get<double>();
    if (static_cast<Index>(s.frequencies.size()) != s.amplitudes.size()) {
        throw std::invalid_argument("json: scene frequencies and amplitudes differ in length");
    }
    return s;
}

Json to_json(const SensingMatrix& A, bool with_entries,
             std::optional<std::uint64_t> seed)
{
    Json j = {{"rows", A.matrix.rows()},
              {"cols", A.matrix.cols()},
              {"grid", to_json(A.grid)},
              {"shift_invariant", A.shift_invariant},
              {"times", std::vector<double>(A.times.data(), A.times.data() + A.times.size())}};
    if (with_entries) {
        Json cols = Json::array();
        for (Index c = 0; c < A.matrix.cols(); ++c) {
            cols.push_back(cvector_to_json(A.matrix.col(c)));
        }
        j["columns"] = std::move(cols);
    }
    if (seed) {
        j["seed"] = *seed;
    }
    return j;
}

SensingMatrix matrix_from_json(const Json& j)
{
    const GridSpec grid = grid_from_json(require(j, "grid"));
    const auto times = require(j, "times").get<std::vector<double>>();
    if (j.contains("columns")) {
        SensingMatrix A;
        A.grid = grid;
        A.shift_invariant = require(j, "shift_invariant").get<bool>();
        A.times = Eigen::Map<const RVector>(times.data(), static_cast<Index>(times.size()));
        const Json& cols = j.at("columns");
        const auto rows = require(j, "rows").get<Index>();
        A.matrix.resize(rows, static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const CVector col = cvector_from_json(cols[c]);
            if (col.size() != rows) {
                throw std::invalid_argument("json: matrix column has wrong length");
            }
            A.matrix.col(static_cast<Index>(c)) = col;
        }
        return A;
    }
    if (times.empty()) {
        throw std::invalid_argument("json: matrix needs either 'columns' or 'times'");
    }
    return spectral_matrix_from_times(
        Eigen::Map<const RVector>(times.data(), static_cast<Index>(times.size())), grid);
}

Json to_json(const RecoveryResult& result)
{
    Json history = Json::array();
    for (double v : result.residual_norm_history) {
        history.push_back(number_to_json(v));
    }
    Json picks = Json::array();
    for (const SelectionStep& step : result.trace) {
        picks.push_back(step.pick);
    }
    return {{"estimate", to_json(result.estimate)},
            {"residual_norm", number_to_json(result.residual.norm())},
            {"residual_norm_history", std::move(history)},
            {"iterations", result.iterations},
            {"termination", std::string(to_string(result.termination))},
            {"picks", std::move(picks)}};
}

RecoveryResult result_from_json(const Json& j)
{
    RecoveryResult r;
    r.estimate = signal_from_json(require(j, "estimate"));
    for (const Json& v : require(j, "residual_norm_history")) {
        r.residual_norm_history.push_back(v.is_string() ? std::stod(v.get<std::string>())
                                                        : v.get<double>());
    }
    r.iterations = require(j, "iterations").get<Index>();
    const auto name = require(j, "termination").get<std::string>();
    bool known = false;
    for (Termination t : {Termination::sparsity_reached, Termination::residual_below_eps,
                          Termination::residual_nonimproving,
                          Termination::exclusion_exhausted, Termination::max_iterations}) {
        if (to_string(t) == name) {
            r.termination = t;
            known = true;
        }
    }
    if (!known) {
        throw std::invalid_argument("json: unknown termination '" + name + "'");
    }
    for (const Json& p : require(j, "picks")) {
        r.trace.push_back({p.get<Index>(), {}});
    }
    return r;
}

Json to_json(const TrialOutcome& o)
{
    return {{"bottleneck_rl", number_to_json(o.bottleneck_rl)},
            {"success", o.success},
            {"rel_residual", number_to_json(o.rel_residual)},
            {"rel_coeff_error", number_to_json(o.rel_coeff_error)},
            {"rel_signal_error", number_to_json(o.rel_signal_error)}};
}

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << value;
    return os.str();
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed)
{
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t instance_hash(const CMatrix& A, const CVector& b)
{
    const std::uint64_t h = fnv1a(A.data(), sizeof(Complex) * static_cast<std::size_t>(A.size()));
    return fnv1a(b.data(), sizeof(Complex) * static_cast<std::size_t>(b.size()), h);
}

} // namespace bandex
