///
/// \file serialize.hpp
///
/// JSON round-trips for scenes, matrices and recovery results.
///
/// Complex numbers are written as [re, im] pairs.  Doubles survive a
/// round-trip exactly (the JSON writer emits shortest round-trip text).
///
#ifndef BANDEX_SERIALIZE_HPP
#define BANDEX_SERIALIZE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include <bandex/metrics.hpp>
#include <bandex/recovery.hpp>

namespace bandex
{

using Json = nlohmann::json;

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);
Json cvector_to_json(const CVector& v);
CVector cvector_from_json(const Json& j);

Json to_json(const GridSpec& grid);
GridSpec grid_from_json(const Json& j);

/// `seed` is recorded when known so a scene can be regenerated.
Json to_json(const SparseSignal& x, std::optional<std::uint64_t> seed = {});
SparseSignal signal_from_json(const Json& j);

Json to_json(const OffGridScene& scene, std::optional<std::uint64_t> seed = {});
OffGridScene scene_from_json(const Json& j);

/// Sample times and grid always; entries only when `with_entries`.
Json to_json(const SensingMatrix& A, bool with_entries = false,
             std::optional<std::uint64_t> seed = {});
/// Rebuilds from entries when present, otherwise from the sample times.
SensingMatrix matrix_from_json(const Json& j);

Json to_json(const RecoveryResult& result);
RecoveryResult result_from_json(const Json& j);

Json to_json(const TrialOutcome& outcome);

/// 17 significant digits, classic locale; "nan", "inf", "-inf" spelled out.
std::string format_double(double value);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t instance_hash(const CMatrix& A, const CVector& b);

} // namespace bandex

#endif // BANDEX_SERIALIZE_HPP
