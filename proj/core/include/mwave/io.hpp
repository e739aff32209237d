#pragma once

#include <array>
#include <string>

#include "mwave/forward.hpp"
#include "mwave/grid.hpp"
#include "mwave/instability.hpp"
#include "mwave/linearize.hpp"
#include "mwave/reconstruct.hpp"
#include "mwave/wave.hpp"

namespace mwave::io {

/// Shortest round-trip decimal form (%.17g).
std::string format_double(double v);

/// `<stem>.f64` holds little-endian doubles, `<stem>.json` the layout
/// {n, h, pad, extent, support_box, role}.
void write_field(const std::string& stem, const ScalarField& f, const std::string& role);
ScalarField read_field(const std::string& stem);

/// Time-major raw doubles plus {T, nt, dt, n, pad, boundary_nodes: [[x, y], ...]}.
void write_trace(const std::string& stem, const BoundaryTrace& tr);
BoundaryTrace read_trace(const std::string& stem);

/// `<stem>_delta_f`, `<stem>_delta_c2` fields and `<stem>.json` {N, residual, base_point_id, log}.
void write_kernel_pair(const std::string& stem, const KernelPair& kp, const std::string& base_point_id);

void write_identities_json(const std::string& path, const std::array<OperatorResidualReport, 4>& reports,
                           const LeftInverseReport* left = nullptr);

/// Columns: iteration, increment_norm, error_if_known.
void write_neumann_csv(const std::string& path, const NeumannReport& rep);

/// Columns: lambda, input_norm, output_norm, ratio.
void write_decay_csv(const std::string& path, const DecayReport& rep);

/// Columns: k, sigma, sigma_normalized, subspace_id.
void write_spectrum_csv(const std::string& path, const SpectrumReport& rep);

/// Writes `text` to `path`, creating parent directories; throws std::runtime_error on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace mwave::io
