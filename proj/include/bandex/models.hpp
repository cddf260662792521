///
/// \file models.hpp
///
/// Sensing ensembles and test objects.
///
/// Frequencies are measured in Rayleigh lengths (RL).  A grid with refinement
/// factor F over a window of R RL has M = R F points p_l = l / F,
/// l = 0, ..., M - 1.
///
#ifndef BANDEX_MODELS_HPP
#define BANDEX_MODELS_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <bandex/numlin.hpp>

namespace bandex
{

using Rng = std::mt19937_64;

struct GridSpec
{
    int refinement       = 20;    ///< F, grid points per RL
    double rayleigh_span = 200.0; ///< R, window length in RL

    /// M = R F.  Throws if R F is not a positive integer.
    Index columns() const;
    double spacing() const { return 1.0 / refinement; }
    double position(Index l) const
    {
        return static_cast<double>(l) / refinement;
    }
    /// Number of whole grid steps covered by `rl` Rayleigh lengths.
    Index steps(double rl) const;
    /// Index of the grid point nearest to `freq`, clipped to [0, M).
    Index nearest(double freq) const;
};

bool operator==(const GridSpec& a, const GridSpec& b);

struct SensingMatrix
{
    CMatrix matrix;
    GridSpec grid;
    RVector times;                ///< sample times in (0, 1); empty for frames
    bool shift_invariant = false; ///< <a_k, a_l> depends only on l - k
};

///
/// Sparse grid object: support strictly increasing, amplitudes nonzero.
///
struct SparseSignal
{
    IndexSet support;
    CVector amplitudes;
    GridSpec grid;

    Index sparsity() const { return static_cast<Index>(support.size()); }
    double max_magnitude() const;
    double min_magnitude() const;
    /// max |x_k| / min |x_k|; 1 for an empty signal.
    double dynamic_range() const;
    CVector dense() const;
    std::vector<double> positions() const;
    /// Throws std::invalid_argument if an invariant is broken.
    void validate() const;
};

/// Continuous-frequency scene used for gridding-error studies.
struct OffGridScene
{
    std::vector<double> frequencies; ///< RL units, in [0, span)
    CVector amplitudes;
    double span = 0.0;

    double dynamic_range() const;
};

/// Entries exp(-2 pi i l xi_k / F) / sqrt(N) with xi_k ~ U(0, 1).
SensingMatrix spectral_matrix(Index samples, const GridSpec& grid, Rng& rng);

/// Same construction with caller-provided sample times.
SensingMatrix spectral_matrix_from_times(const RVector& times,
                                         const GridSpec& grid);

///
/// Fast products with a spectral matrix.  Writing l = F m + r, the entry
/// exp(-2 pi i (l/F) t_k) splits as exp(-2 pi i r t_k / F) exp(-2 pi i m t_k),
/// so A x is a small N x F by F x ceil(M/F) product and a row reduction.
/// Borrows `A`, which must outlive the operator.
///
class SpectralOperator final : public LinearOperator
{
public:
    /// Throws std::invalid_argument unless `A` carries its sample times.
    explicit SpectralOperator(const SensingMatrix& A);

    Index rows() const override { return dense_.rows(); }
    Index cols() const override { return dense_.cols(); }
    CVector apply(const CVector& x) const override;
    CVector adjoint(const CVector& r) const override;
    CMatrix outer_gram() const override;

private:
    const CMatrix& dense_;
    CMatrix fine_;        ///< N x F, exp(-2 pi i r t_k / F)
    CMatrix coarse_;      ///< N x ceil(M/F), exp(-2 pi i m t_k) / sqrt(N)
    CMatrix coarse_conj_;
};

struct FrameModel
{
    CMatrix phi; ///< N x R real Gaussian, entries of variance sigma^2
    CMatrix psi; ///< R x RF oversampled DFT frame
    CMatrix A;   ///< phi * psi
    GridSpec grid;
};

/// Psi_{k,j} = exp(-2 pi i k j / (R F)) / sqrt(R).
CMatrix dft_frame(Index span, int refinement);

FrameModel frame_model(Index samples, Index span, int refinement,
                       double sigma, Rng& rng);

///
/// s randomly phased objects on the grid with pairwise separation of at least
/// `min_sep_rl`.  Magnitudes are log-uniform on [1, dr] with one object pinned
/// to 1 and one to dr so the realised dynamic range equals dr.
///
/// Throws std::invalid_argument when the objects cannot fit in the window.
///
SparseSignal make_objects(int sparsity, double dynamic_range,
                          double min_sep_rl, const GridSpec& grid, Rng& rng);

///
/// s objects at equal spacing `spacing_rl` with a random global shift.  The
/// spacing is rounded to whole grid steps; spacing <= 1/F is rejected.
///
SparseSignal make_consecutive_objects(int sparsity, double spacing_rl,
                                      double dynamic_range,
                                      const GridSpec& grid, Rng& rng);

/// Continuous analogue of make_objects; frequencies stay `edge_margin` RL
/// away from both ends of [0, span).
OffGridScene make_offgrid_scene(int sparsity, double dynamic_range,
                                double min_sep_rl, double span, Rng& rng,
                                double edge_margin = 0.5);

struct NoiseDraw
{
    CVector noise;
    double sigma = 0.0; ///< per-component standard deviation, ||n|| / sqrt(N)
};

/// Circular complex Gaussian noise rescaled so ||n|| = level * ||clean||.
NoiseDraw relative_noise(const CVector& clean, double level, Rng& rng);

struct SynthesizedData
{
    CVector b;              ///< observed data y + n
    CVector clean;          ///< y
    CVector gridding_error; ///< d = b - n - A x_nearest
    CVector noise;          ///< n
    CVector total_error;    ///< e = d + n
    SparseSignal x_nearest;
    double sigma = 0.0;
};

///
/// Sample the scene at `times`, snap each frequency to its nearest grid point
/// and add relative noise.  Throws if two frequencies snap to the same point.
///
SynthesizedData synthesize_data(const OffGridScene& scene,
                                const RVector& times, const GridSpec& grid,
                                double noise_level, Rng& rng);

} // namespace bandex

#endif // BANDEX_MODELS_HPP
