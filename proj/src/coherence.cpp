#include <bandex/coherence.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bandex
{

namespace
{

constexpr Index gram_block = 256;

RVector column_norms(const CMatrix& A)
{
    RVector norms = A.colwise().norm().transpose();
    for (Index j = 0; j < norms.size(); ++j) {
        if (norms(j) == 0.0) {
            throw std::invalid_argument("coherence: zero column " +
                                        std::to_string(j));
        }
    }
    return norms;
}

void sort_unique(IndexSet& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Normalised correlations of column 0 with every column.
RVector lag_profile(const CMatrix& A)
{
    const RVector norms = column_norms(A);
    RVector profile = (A.adjoint() * A.col(0)).cwiseAbs();
    for (Index l = 0; l < profile.size(); ++l) {
        profile(l) /= norms(0) * norms(l);
    }
    profile(0) = 1.0;
    return profile;
}

} // namespace

double pairwise_coherence(const CMatrix& A, Index k, Index l)
{
    if (k < 0 || l < 0 || k >= A.cols() || l >= A.cols()) {
        throw std::out_of_range("pairwise_coherence: index out of range");
    }
    const double nk = A.col(k).norm();
    const double nl = A.col(l).norm();
    if (nk == 0.0 || nl == 0.0) {
        throw std::invalid_argument("pairwise_coherence: zero column");
    }
    if (k == l) {
        return 1.0;
    }
    return std::abs(A.col(k).dot(A.col(l))) / (nk * nl);
}

double mutual_coherence(const CMatrix& A)
{
    if (A.cols() < 2) {
        throw std::invalid_argument("mutual_coherence: need at least two columns");
    }
    const RVector norms = column_norms(A);
    const Index m = A.cols();
    double best = 0.0;
    for (Index start = 0; start < m; start += gram_block) {
        const Index width = std::min(gram_block, m - start);
        const CMatrix gram = A.middleCols(start, width).adjoint() * A;
        for (Index i = 0; i < width; ++i) {
            const Index k = start + i;
            for (Index l = 0; l < m; ++l) {
                if (l != k) {
                    best = std::max(best, std::abs(gram(i, l)) / (norms(k) * norms(l)));
                }
            }
        }
    }
    return best;
}

double mutual_coherence(const SensingMatrix& A)
{
    if (!A.shift_invariant) {
        return mutual_coherence(A.matrix);
    }
    if (A.matrix.cols() < 2) {
        throw std::invalid_argument("mutual_coherence: need at least two columns");
    }
    const RVector profile = lag_profile(A.matrix);
    return profile.tail(profile.size() - 1).maxCoeff();
}

// ---------------------------------------------------------------------------
// BandIndex
// ---------------------------------------------------------------------------

std::span<const Index> BandIndex::band(Index k) const
{
    if (k < 0 || k >= columns()) {
        throw std::out_of_range("BandIndex::band: index out of range");
    }
    return bands_[static_cast<std::size_t>(k)];
}

IndexSet BandIndex::band_of(std::span<const Index> S) const
{
    IndexSet out;
    for (Index k : S) {
        const auto b = band(k);
        out.insert(out.end(), b.begin(), b.end());
    }
    sort_unique(out);
    return out;
}

IndexSet BandIndex::double_band(std::span<const Index> S) const
{
    const IndexSet single = band_of(S);
    return band_of(single);
}

void BandIndex::mark_exclusion(Index k, std::vector<char>& mask) const
{
    if (static_cast<Index>(mask.size()) != columns()) {
        throw std::invalid_argument("mark_exclusion: mask size mismatch");
    }
    if (std::holds_alternative<FixedRadius>(policy_)) {
        const Index lo = std::max<Index>(0, k - be_steps_);
        const Index hi = std::min<Index>(columns() - 1, k + be_steps_);
        std::fill(mask.begin() + lo, mask.begin() + hi + 1, char{1});
        return;
    }
    for (Index j : band(k)) {
        for (Index l : band(j)) {
            mask[static_cast<std::size_t>(l)] = 1;
        }
    }
}

IndexSet BandIndex::exclusion_zone(std::span<const Index> S) const
{
    std::vector<char> mask(static_cast<std::size_t>(columns()), 0);
    for (Index k : S) {
        mark_exclusion(k, mask);
    }
    IndexSet out;
    for (Index l = 0; l < columns(); ++l) {
        if (mask[static_cast<std::size_t>(l)]) {
            out.push_back(l);
        }
    }
    return out;
}

BandIndex build_band_index(const CMatrix& A, const GridSpec& grid,
                           const BandPolicy& policy, bool shift_invariant)
{
    const Index m = A.cols();
    BandIndex idx;
    idx.policy_ = policy;
    idx.grid_   = grid;
    idx.bands_.assign(static_cast<std::size_t>(m), {});

    if (const auto* radius = std::get_if<FixedRadius>(&policy)) {
        if (!(radius->be_radius > 0.0) || !(radius->lo_radius > 0.0)) {
            throw std::invalid_argument("FixedRadius: radii must be positive");
        }
        // |p_l - p_k| <= r  <=>  |l - k| <= floor(r F)
        const auto lo_steps = static_cast<Index>(
            std::floor(radius->lo_radius * grid.refinement + 1e-9));
        idx.be_steps_ = static_cast<Index>(
            std::floor(radius->be_radius * grid.refinement + 1e-9));
        for (Index k = 0; k < m; ++k) {
            auto& b = idx.bands_[static_cast<std::size_t>(k)];
            for (Index l = std::max<Index>(0, k - lo_steps);
                 l <= std::min<Index>(m - 1, k + lo_steps); ++l) {
                b.push_back(l);
            }
        }
        return idx;
    }

    const double eta = std::get<CoherenceThreshold>(policy).eta;
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument("CoherenceThreshold: eta must lie in (0, 1)");
    }

    if (shift_invariant) {
        const RVector profile = lag_profile(A);
        IndexSet lags;
        for (Index d = 1; d < m; ++d) {
            if (profile(d) > eta) {
                lags.push_back(d);
            }
        }
        for (Index k = 0; k < m; ++k) {
            auto& b = idx.bands_[static_cast<std::size_t>(k)];
            for (auto it = lags.rbegin(); it != lags.rend(); ++it) {
                if (k - *it >= 0) {
                    b.push_back(k - *it);
                }
            }
            b.push_back(k);
            for (Index d : lags) {
                if (k + d < m) {
                    b.push_back(k + d);
                }
            }
        }
        return idx;
    }

    // Upper triangle only, mirrored, so membership is exactly symmetric.
    const RVector norms = column_norms(A);
    for (Index start = 0; start < m; start += gram_block) {
        const Index width = std::min(gram_block, m - start);
        const Index tail  = m - start;
        const CMatrix gram = A.middleCols(start, width).adjoint() * A.rightCols(tail);
        for (Index i = 0; i < width; ++i) {
            const Index k = start + i;
            idx.bands_[static_cast<std::size_t>(k)].push_back(k);
            for (Index l = k + 1; l < m; ++l) {
                const double mu = std::abs(gram(i, l - start)) / (norms(k) * norms(l));
                if (mu > eta) {
                    idx.bands_[static_cast<std::size_t>(k)].push_back(l);
                    idx.bands_[static_cast<std::size_t>(l)].push_back(k);
                }
            }
        }
    }
    for (auto& b : idx.bands_) {
        sort_unique(b);
    }
    return idx;
}

BandIndex build_band_index(const SensingMatrix& A, const BandPolicy& policy)
{
    return build_band_index(A.matrix, A.grid, policy, A.shift_invariant);
}

std::vector<std::pair<double, double>>
coherence_profile(const SensingMatrix& A, double max_sep_rl)
{
    const Index m = A.matrix.cols();
    const Index max_lag = std::min<Index>(m - 1, A.grid.steps(max_sep_rl));
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(max_lag + 1));

    if (A.shift_invariant) {
        const RVector profile = lag_profile(A.matrix);
        for (Index d = 0; d <= max_lag; ++d) {
            out.emplace_back(A.grid.position(d), profile(d));
        }
        return out;
    }

    const RVector norms = column_norms(A.matrix);
    for (Index d = 0; d <= max_lag; ++d) {
        double sum = 0.0;
        for (Index k = 0; k + d < m; ++k) {
            sum += std::abs(A.matrix.col(k).dot(A.matrix.col(k + d))) /
                   (norms(k) * norms(k + d));
        }
        out.emplace_back(A.grid.position(d), sum / static_cast<double>(m - d));
    }
    return out;
}

double band_half_width_rl(const BandIndex& bands, Index k)
{
    const auto b = bands.band(k);
    const auto self = std::lower_bound(b.begin(), b.end(), k);
    Index right = 0;
    for (auto it = self + 1; it != b.end() && *it == k + right + 1; ++it) {
        ++right;
    }
    Index left = 0;
    for (auto it = std::make_reverse_iterator(self);
         it != b.rend() && *it == k - left - 1; ++it) {
        ++left;
    }
    return 0.5 * static_cast<double>(left + right) / bands.grid().refinement;
}

} // namespace bandex
