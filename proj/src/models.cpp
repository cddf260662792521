#include <bandex/models.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bandex
{

namespace
{

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Magnitudes log-uniform on [1, dr], extremes pinned; phases uniform.
CVector random_amplitudes(int sparsity, double dynamic_range, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> magnitude(static_cast<std::size_t>(sparsity));
    const double log_dr = std::log(dynamic_range);
    for (auto& m : magnitude) {
        m = std::exp(unit(rng) * log_dr);
    }
    if (sparsity >= 1) {
        magnitude[0] = 1.0;
    }
    if (sparsity >= 2) {
        magnitude[1] = dynamic_range;
    }
    std::shuffle(magnitude.begin(), magnitude.end(), rng);

    CVector amplitudes(sparsity);
    for (int k = 0; k < sparsity; ++k) {
        amplitudes(k) = std::polar(magnitude[static_cast<std::size_t>(k)],
                                   two_pi * unit(rng));
    }
    return amplitudes;
}

void check_object_args(int sparsity, double dynamic_range)
{
    if (sparsity < 1) {
        throw std::invalid_argument("sparsity must be at least 1");
    }
    if (!(dynamic_range >= 1.0) || !std::isfinite(dynamic_range)) {
        throw std::invalid_argument("dynamic range must be finite and >= 1");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// GridSpec
// ---------------------------------------------------------------------------

Index GridSpec::columns() const
{
    if (refinement < 1 || !(rayleigh_span > 0.0)) {
        throw std::invalid_argument("grid: refinement and span must be positive");
    }
    const double m = rayleigh_span * refinement;
    const double rounded = std::round(m);
    if (std::abs(m - rounded) > 1e-9 * std::max(1.0, m)) {
        throw std::invalid_argument("grid: R * F must be an integer");
    }
    return static_cast<Index>(rounded);
}

Index GridSpec::steps(double rl) const
{
    // Tolerance absorbs values such as 0.3 * 20 = 6.000000000000001.
    return static_cast<Index>(std::ceil(rl * refinement - 1e-9));
}

Index GridSpec::nearest(double freq) const
{
    const auto l = static_cast<Index>(std::llround(freq * refinement));
    return std::clamp<Index>(l, 0, columns() - 1);
}

bool operator==(const GridSpec& a, const GridSpec& b)
{
    return a.refinement == b.refinement && a.rayleigh_span == b.rayleigh_span;
}

// ---------------------------------------------------------------------------
// SparseSignal / OffGridScene
// ---------------------------------------------------------------------------

double SparseSignal::max_magnitude() const
{
    return amplitudes.size() == 0 ? 0.0 : amplitudes.cwiseAbs().maxCoeff();
}

double SparseSignal::min_magnitude() const
{
    return amplitudes.size() == 0 ? 0.0 : amplitudes.cwiseAbs().minCoeff();
}

double SparseSignal::dynamic_range() const
{
    if (amplitudes.size() == 0) {
        return 1.0;
    }
    return max_magnitude() / min_magnitude();
}

CVector SparseSignal::dense() const
{
    return densify(grid.columns(), support, amplitudes);
}

std::vector<double> SparseSignal::positions() const
{
    std::vector<double> out;
    out.reserve(support.size());
    for (Index l : support) {
        out.push_back(grid.position(l));
    }
    return out;
}

void SparseSignal::validate() const
{
    if (static_cast<Index>(support.size()) != amplitudes.size()) {
        throw std::invalid_argument("signal: support/amplitude length mismatch");
    }
    const Index m = grid.columns();
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (support[k] < 0 || support[k] >= m) {
            throw std::invalid_argument("signal: support index out of range");
        }
        if (k > 0 && support[k] <= support[k - 1]) {
            throw std::invalid_argument("signal: support not strictly increasing");
        }
        if (amplitudes(static_cast<Index>(k)) == Complex(0.0, 0.0)) {
            throw std::invalid_argument("signal: zero amplitude on support");
        }
    }
}

double OffGridScene::dynamic_range() const
{
    if (amplitudes.size() == 0) {
        return 1.0;
    }
    const RVector mag = amplitudes.cwiseAbs();
    return mag.maxCoeff() / mag.minCoeff();
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

SensingMatrix spectral_matrix(Index samples, const GridSpec& grid, Rng& rng)
{
    if (samples < 1) {
        throw std::invalid_argument("spectral_matrix: need at least one sample");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RVector times(samples);
    for (Index k = 0; k < samples; ++k) {
        double t = unit(rng);
        while (t == 0.0) { // open interval (0, 1)
            t = unit(rng);
        }
        times(k) = t;
    }
    return spectral_matrix_from_times(times, grid);
}

SensingMatrix spectral_matrix_from_times(const RVector& times,
                                         const GridSpec& grid)
{
    const Index n = times.size();
    if (n < 1) {
        throw std::invalid_argument("spectral_matrix: need at least one sample");
    }
    const Index m     = grid.columns();
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));

    SensingMatrix out;
    out.grid            = grid;
    out.times           = times;
    out.shift_invariant = true;
    out.matrix.resize(n, m);
    for (Index l = 0; l < m; ++l) {
        const double freq = grid.position(l);
        for (Index k = 0; k < n; ++k) {
            out.matrix(k, l) = std::polar(norm, -two_pi * freq * times(k));
        }
    }
    return out;
}

SpectralOperator::SpectralOperator(const SensingMatrix& A) : dense_(A.matrix)
{
    const Index n = A.matrix.rows();
    const Index m = A.matrix.cols();
    if (A.times.size() != n || n == 0) {
        throw std::invalid_argument("SpectralOperator: matrix has no sample times");
    }
    const Index f = A.grid.refinement;
    const Index blocks = (m + f - 1) / f;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    fine_.resize(n, f);
    coarse_.resize(n, blocks);
    for (Index k = 0; k < n; ++k) {
        const double t = A.times(k);
        for (Index r = 0; r < f; ++r) {
            fine_(k, r) = std::polar(1.0, -two_pi * t * static_cast<double>(r) /
                                              static_cast<double>(f));
        }
        for (Index q = 0; q < blocks; ++q) {
            coarse_(k, q) = std::polar(norm, -two_pi * t * static_cast<double>(q));
        }
    }
    coarse_conj_ = coarse_.conjugate();
}

CVector SpectralOperator::apply(const CVector& x) const
{
    if (x.size() != cols()) {
        throw std::invalid_argument("SpectralOperator::apply: size mismatch");
    }
    const Index f = fine_.cols();
    const Index blocks = coarse_.cols();
    CVector padded = CVector::Zero(f * blocks);
    padded.head(x.size()) = x;
    const CMatrix t = fine_ * Eigen::Map<const CMatrix>(padded.data(), f, blocks);
    return t.cwiseProduct(coarse_).rowwise().sum();
}

CVector SpectralOperator::adjoint(const CVector& r) const
{
    if (r.size() != rows()) {
        throw std::invalid_argument("SpectralOperator::adjoint: size mismatch");
    }
    const CMatrix w = fine_.adjoint() * (r.asDiagonal() * coarse_conj_);
    return Eigen::Map<const CVector>(w.data(), w.size()).head(cols());
}

CMatrix SpectralOperator::outer_gram() const
{
    return dense_ * dense_.adjoint();
}

CMatrix dft_frame(Index span, int refinement)
{
    if (span < 1 || refinement < 1) {
        throw std::invalid_argument("dft_frame: span and refinement must be positive");
    }
    const Index m      = span * refinement;
    const double scale = 1.0 / std::sqrt(static_cast<double>(span));
    CMatrix psi(span, m);
    for (Index j = 0; j < m; ++j) {
        for (Index k = 0; k < span; ++k) {
            // Reduce k j mod RF before scaling to keep the phase exact.
            const Index phase = (k * j) % m;
            psi(k, j) = std::polar(scale, -two_pi * static_cast<double>(phase) /
                                              static_cast<double>(m));
        }
    }
    return psi;
}

FrameModel frame_model(Index samples, Index span, int refinement,
                       double sigma, Rng& rng)
{
    if (samples < 1) {
        throw std::invalid_argument("frame_model: need at least one sample");
    }
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("frame_model: sigma must be non-negative");
    }
    FrameModel out;
    out.grid = GridSpec{refinement, static_cast<double>(span)};
    out.psi  = dft_frame(span, refinement);

    std::normal_distribution<double> gauss(0.0, sigma);
    out.phi.resize(samples, span);
    for (Index j = 0; j < span; ++j) {
        for (Index k = 0; k < samples; ++k) {
            out.phi(k, j) = Complex(gauss(rng), 0.0);
        }
    }
    out.A = out.phi * out.psi;
    return out;
}

// ---------------------------------------------------------------------------
// Objects
// ---------------------------------------------------------------------------

SparseSignal make_objects(int sparsity, double dynamic_range,
                          double min_sep_rl, const GridSpec& grid, Rng& rng)
{
    check_object_args(sparsity, dynamic_range);
    if (!(min_sep_rl >= 0.0)) {
        throw std::invalid_argument("make_objects: separation must be >= 0");
    }
    const Index m   = grid.columns();
    const Index gap = std::max<Index>(1, grid.steps(min_sep_rl));
    const Index slack = (m - 1) - static_cast<Index>(sparsity - 1) * gap;
    if (slack < 0) {
        throw std::invalid_argument(
            "make_objects: cannot place " + std::to_string(sparsity) +
            " objects " + std::to_string(min_sep_rl) + " RL apart in " +
            std::to_string(grid.rayleigh_span) + " RL");
    }

    // Sorted uniform draws on the reduced window, then re-inflated by the gap:
    // every feasible configuration is reachable and no rejection is needed.
    std::uniform_int_distribution<Index> pick(0, slack);
    IndexSet base(static_cast<std::size_t>(sparsity));
    for (auto& v : base) {
        v = pick(rng);
    }
    std::sort(base.begin(), base.end());

    SparseSignal x;
    x.grid = grid;
    x.support.resize(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
        x.support[k] = base[k] + static_cast<Index>(k) * gap;
    }
    x.amplitudes = random_amplitudes(sparsity, dynamic_range, rng);
    return x;
}

SparseSignal make_consecutive_objects(int sparsity, double spacing_rl,
                                      double dynamic_range,
                                      const GridSpec& grid, Rng& rng)
{
    check_object_args(sparsity, dynamic_range);
    if (!(spacing_rl > grid.spacing() * (1.0 + 1e-12))) {
        throw std::invalid_argument(
            "make_consecutive_objects: spacing must exceed the grid spacing 1/F");
    }
    const Index m    = grid.columns();
    const auto step  = static_cast<Index>(std::llround(spacing_rl * grid.refinement));
    const Index extent = static_cast<Index>(sparsity - 1) * step;
    if (extent > m - 1) {
        throw std::invalid_argument("make_consecutive_objects: objects do not fit");
    }
    std::uniform_int_distribution<Index> shift(0, (m - 1) - extent);
    const Index start = shift(rng);

    SparseSignal x;
    x.grid = grid;
    for (int k = 0; k < sparsity; ++k) {
        x.support.push_back(start + k * step);
    }
    x.amplitudes = random_amplitudes(sparsity, dynamic_range, rng);
    return x;
}

OffGridScene make_offgrid_scene(int sparsity, double dynamic_range,
                                double min_sep_rl, double span, Rng& rng,
                                double edge_margin)
{
    check_object_args(sparsity, dynamic_range);
    const double room =
        span - 2.0 * edge_margin - (sparsity - 1) * min_sep_rl;
    if (!(room > 0.0)) {
        throw std::invalid_argument("make_offgrid_scene: objects do not fit");
    }
    std::uniform_real_distribution<double> place(0.0, room);
    std::vector<double> base(static_cast<std::size_t>(sparsity));
    for (auto& v : base) {
        v = place(rng);
    }
    std::sort(base.begin(), base.end());

    OffGridScene scene;
    scene.span = span;
    for (std::size_t k = 0; k < base.size(); ++k) {
        scene.frequencies.push_back(edge_margin + base[k] +
                                    static_cast<double>(k) * min_sep_rl);
    }
    scene.amplitudes = random_amplitudes(sparsity, dynamic_range, rng);
    return scene;
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

NoiseDraw relative_noise(const CVector& clean, double level, Rng& rng)
{
    if (!(level >= 0.0)) {
        throw std::invalid_argument("noise level must be non-negative");
    }
    NoiseDraw out;
    out.noise = CVector::Zero(clean.size());
    if (level == 0.0 || clean.size() == 0) {
        return out;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index k = 0; k < clean.size(); ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        out.noise(k) = Complex(re, im);
    }
    const double target = level * clean.norm();
    const double norm   = out.noise.norm();
    if (norm > 0.0) {
        out.noise *= target / norm;
    }
    out.sigma = target / std::sqrt(static_cast<double>(clean.size()));
    return out;
}

SynthesizedData synthesize_data(const OffGridScene& scene,
                                const RVector& times, const GridSpec& grid,
                                double noise_level, Rng& rng)
{
    if (!(noise_level >= 0.0)) {
        throw std::invalid_argument("synthesize_data: noise level must be >= 0");
    }
    const Index n     = times.size();
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    const std::size_t count = scene.frequencies.size();

    SynthesizedData out;
    out.clean = CVector::Zero(n);
    for (std::size_t j = 0; j < count; ++j) {
        const Complex c = scene.amplitudes(static_cast<Index>(j));
        for (Index k = 0; k < n; ++k) {
            out.clean(k) +=
                c * std::polar(norm, -two_pi * scene.frequencies[j] * times(k));
        }
    }

    // Snap to the grid; sorted frequencies give a sorted support.
    std::vector<std::pair<Index, Complex>> snapped;
    for (std::size_t j = 0; j < count; ++j) {
        snapped.emplace_back(grid.nearest(scene.frequencies[j]),
                             scene.amplitudes(static_cast<Index>(j)));
    }
    std::sort(snapped.begin(), snapped.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.x_nearest.grid = grid;
    out.x_nearest.amplitudes.resize(static_cast<Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        if (j > 0 && snapped[j].first == snapped[j - 1].first) {
            throw std::invalid_argument(
                "synthesize_data: two frequencies share a nearest grid point");
        }
        out.x_nearest.support.push_back(snapped[j].first);
        out.x_nearest.amplitudes(static_cast<Index>(j)) = snapped[j].second;
    }

    CVector gridded = CVector::Zero(n);
    for (std::size_t j = 0; j < count; ++j) {
        const double freq = grid.position(out.x_nearest.support[j]);
        const Complex c   = out.x_nearest.amplitudes(static_cast<Index>(j));
        for (Index k = 0; k < n; ++k) {
            gridded(k) += c * std::polar(norm, -two_pi * freq * times(k));
        }
    }

    NoiseDraw noise  = relative_noise(out.clean, noise_level, rng);
    out.noise        = std::move(noise.noise);
    out.sigma        = noise.sigma;
    out.b            = out.clean + out.noise;
    out.gridding_error = out.clean - gridded;
    out.total_error  = out.gridding_error + out.noise;
    return out;
}

} // namespace bandex
