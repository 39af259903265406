#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmt/gauss.hpp"
#include "gmt/kernel.hpp"
#include "gmt/rate.hpp"
#include "gmt/simulate.hpp"
#include "gmt/spectral.hpp"
#include "gmt/time_function.hpp"

namespace gmt::io {

using json = nlohmann::json;

/// A kernel parsed from its JSON description, with its decay rate when known in closed form.
struct KernelSpec {
    Kernel kernel;
    std::optional<RateFunction> rate;
    json source;
};

/// Parses inline JSON text, or reads the file it names when it does not start with '{', '[' or '"'.
json load_json_argument(const std::string& text_or_path);

KernelSpec parse_kernel(const json& spec);
RateFunction parse_rate(const json& spec);
TimeFunction parse_time_function(const json& spec);
/// [lo, hi] with numbers or "-inf"/"inf" (finite ends closed), or {lo, hi, lo_open, hi_open}.
Interval parse_interval(const json& spec);

/// "start:stop:count", evenly spaced and inclusive.
Grid parse_grid(const std::string& text);
/// Comma-separated numbers; entries of the form 2^-k are accepted.
std::vector<double> parse_number_list(const std::string& text);

json to_json(const GaussianVector& g);
GaussianVector gaussian_from_json(const json& j);
json to_json(const SpectralMeasure& mu);
SpectralMeasure measure_from_json(const json& j);

/// 17 significant digits.
std::string format_double(double v);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);
/// Rows of numbers under a header line.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
/// Header "t=<time>" per column, then one row per path (at most max_paths rows).
void write_batch_csv(const std::string& path, const TrajectoryBatch& batch, long max_paths);

}  // namespace gmt::io
