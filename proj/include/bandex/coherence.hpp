///
/// \file coherence.hpp
///
/// Pairwise coherence and the coherence-band structure used for band
/// exclusion and local optimisation.
///
#ifndef BANDEX_COHERENCE_HPP
#define BANDEX_COHERENCE_HPP

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <bandex/models.hpp>
#include <bandex/numlin.hpp>

namespace bandex
{

/// B(k) = { l : mu(k, l) > eta }.  Exclusion uses the double band B(B(S)).
struct CoherenceThreshold
{
    double eta = 0.3;
};

///
/// Distance rule in RL units.  Exclusion around a selected index covers
/// |p_l - p_k| <= be_radius; the local-optimisation band (and B(k)) covers
/// |p_l - p_k| <= lo_radius.
///
struct FixedRadius
{
    double be_radius = 2.0;
    double lo_radius = 1.0;
};

using BandPolicy = std::variant<CoherenceThreshold, FixedRadius>;

/// |<a_k, a_l>| / (||a_k|| ||a_l||).  Throws on a zero column.
double pairwise_coherence(const CMatrix& A, Index k, Index l);

/// Maximum pairwise coherence over distinct columns (needs >= 2 columns).
double mutual_coherence(const CMatrix& A);
/// Uses the single-lag profile when the matrix is shift invariant.
double mutual_coherence(const SensingMatrix& A);

///
/// Immutable per-matrix band table.  Bands are sorted, clipped at the window
/// edges (no wraparound) and always contain their own column.
///
class BandIndex
{
public:
    BandIndex() = default;

    Index columns() const { return static_cast<Index>(bands_.size()); }
    const BandPolicy& policy() const { return policy_; }
    const GridSpec& grid() const { return grid_; }

    /// B(k); under FixedRadius the lo_radius neighbourhood.
    std::span<const Index> band(Index k) const;

    /// Candidates tried by local optimisation for index k.
    std::span<const Index> lo_candidates(Index k) const { return band(k); }

    /// B(S) = union of B(k), k in S.  Sorted.
    IndexSet band_of(std::span<const Index> S) const;

    /// B(B(S)).  Sorted.
    IndexSet double_band(std::span<const Index> S) const;

    /// Mark every index excluded by selecting k: B(B(k)) for
    /// CoherenceThreshold, the be_radius neighbourhood for FixedRadius.
    void mark_exclusion(Index k, std::vector<char>& mask) const;

    /// Indices excluded by the selected set S (sorted).
    IndexSet exclusion_zone(std::span<const Index> S) const;

private:
    friend BandIndex build_band_index(const CMatrix&, const GridSpec&,
                                      const BandPolicy&, bool);

    BandPolicy policy_ = CoherenceThreshold{};
    GridSpec grid_;
    std::vector<IndexSet> bands_;
    Index be_steps_ = 0; ///< FixedRadius exclusion half-width in grid steps
};

///
/// Precompute bands for every column.  With `shift_invariant` the Gram
/// matrix is Toeplitz and one column's correlations define all bands.
///
BandIndex build_band_index(const CMatrix& A, const GridSpec& grid,
                           const BandPolicy& policy,
                           bool shift_invariant = false);

BandIndex build_band_index(const SensingMatrix& A, const BandPolicy& policy);

/// Mean coherence at each lag 0..max_lag, returned as (separation in RL,
/// coherence) pairs.
std::vector<std::pair<double, double>>
coherence_profile(const SensingMatrix& A, double max_sep_rl);

/// Half-width (RL) of the contiguous run of B(k) around k, averaged over the
/// left and right sides.
double band_half_width_rl(const BandIndex& bands, Index k);

} // namespace bandex

#endif // BANDEX_COHERENCE_HPP
