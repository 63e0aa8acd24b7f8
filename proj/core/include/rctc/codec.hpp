// Copyright 2026 The rctc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rctc/channel.hpp"
#include "rctc/linalg.hpp"
#include "rctc/quantizer.hpp"
#include "rctc/random.hpp"

namespace rctc {

enum class TransformKind { Full, Toeplitz, Identity, PLT };

const char* to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& text);

/// Causal transform pair (A, A_hat). Both are mN x mN, unit diagonal,
/// lower triangular, and every off-diagonal m x m block is diagonal. A
/// Toeplitz pair has blocks that depend only on the block lag, and an
/// Identity pair has none at all. PLT is a Full pair with A_hat == A.
///
/// Free coefficients are laid out block row by block row: for Full/PLT
/// the order is (j = 1..N-1, i = 0..j-1, component), for Toeplitz it is
/// (lag = 1..N-1, component). Each matrix has parameter_count() of them.
class CausalTransform {
 public:
  CausalTransform() = default;
  static CausalTransform identity(int frame_length, int block_dim);
  static CausalTransform from_parameters(TransformKind kind, int frame_length, int block_dim,
                                         std::span<const double> encoder, std::span<const double> decoder);
  /// Validates the structure required by `kind`.
  static CausalTransform from_matrices(TransformKind kind, int frame_length, int block_dim, Matrix encoder,
                                       Matrix decoder);

  static std::size_t parameter_count(TransformKind kind, int frame_length, int block_dim);

  TransformKind kind() const { return kind_; }
  int frame_length() const { return frame_length_; }
  int block_dim() const { return block_dim_; }
  int dim() const { return frame_length_ * block_dim_; }

  const Matrix& encoder() const { return encoder_; }
  const Matrix& decoder() const { return decoder_; }
  /// A^{-1}, unit lower triangular.
  const Matrix& encoder_inverse() const { return encoder_inverse_; }

  std::vector<double> encoder_parameters() const { return parameters_of(encoder_); }
  std::vector<double> decoder_parameters() const { return parameters_of(decoder_); }

 private:
  CausalTransform(TransformKind kind, int frame_length, int block_dim, Matrix encoder, Matrix decoder);
  std::vector<double> parameters_of(const Matrix& m) const;

  TransformKind kind_ = TransformKind::Identity;
  int frame_length_ = 0;
  int block_dim_ = 0;
  Matrix encoder_;
  Matrix decoder_;
  Matrix encoder_inverse_;
};

struct TransformPair {
  Matrix encoder;
  Matrix decoder;
};

TransformPair assemble(const CausalTransform& transform);

/// Prediction-based lower triangular transform of K_x together with the
/// quantizer input variances it produces under fine quantization. For
/// m > 1 every component gets its own scalar LDL ladder.
struct PltDesign {
  CausalTransform transform;
  std::vector<double> input_variances;  // mN entries
};

PltDesign plt_design(const CovarianceMatrix& k_x, int block_dim);

/// diag(A^{-1} K_x A^{-T}): quantizer input variances under fine quantization.
std::vector<double> fine_quantization_input_variances(const CausalTransform& transform, const Matrix& k_x);

struct EncodedFrame {
  Vector codevalues;
  std::vector<std::int64_t> indices;  // one per scalar component, -1 without codebooks
  Vector quantizer_inputs;
};

/// Causal ladder: d_i = x_i - sum_{j<i} A_ij xc_j, xc_i = Q_i(d_i).
EncodedFrame encode(std::span<const double> frame, const CausalTransform& transform, const QuantizerBank& bank,
                    Rng& rng);

/// x_hat = (A_hat o B) xc.
Vector decode(std::span<const double> codevalues, const CausalTransform& transform, const AvailabilityMatrix& b);

/// Equivalent fading channel x_hat = H_eq x + noise_map q with
/// H_eq = noise_map = (A_hat o B) A^{-1}.
struct EquivalentChannel {
  Matrix h_eq;
  Matrix noise_map;
};

EquivalentChannel equivalent_channel(const CausalTransform& transform, const AvailabilityMatrix& b);

/// Text format: header lines (kind, frame_length, block_dim) then the
/// encoder and decoder matrices row by row. Values round-trip exactly.
void write_transform(std::ostream& os, const CausalTransform& transform);
CausalTransform read_transform(std::istream& is);

}  // namespace rctc
