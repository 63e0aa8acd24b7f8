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

#include "rctc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "rctc/error.hpp"
#include "rctc/format.hpp"

namespace rctc {
namespace {

void check_dims(int frame_length, int block_dim) {
  if (frame_length < 1 || block_dim < 1) throw DomainError("transform: frame length and block dim must be positive");
}

// Writes the coefficient for (block row j, block col i, component k) into both
// the Toeplitz-shared or the per-block slot, according to `kind`.
Matrix build(TransformKind kind, int n, int m, std::span<const double> params) {
  Matrix out = Matrix::Identity(n * m, n * m);
  std::size_t p = 0;
  if (kind == TransformKind::Toeplitz) {
    for (int lag = 1; lag < n; ++lag) {
      for (int k = 0; k < m; ++k, ++p) {
        for (int j = lag; j < n; ++j) out(j * m + k, (j - lag) * m + k) = params[p];
      }
    }
  } else if (kind != TransformKind::Identity) {
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        for (int k = 0; k < m; ++k, ++p) out(j * m + k, i * m + k) = params[p];
      }
    }
  }
  return out;
}

void validate_structure(TransformKind kind, int n, int m, const Matrix& a, const char* which) {
  const int dim = n * m;
  if (a.rows() != dim || a.cols() != dim) {
    throw DomainError(std::string("transform: ") + which + " matrix has the wrong size");
  }
  if (!a.allFinite()) throw DomainError(std::string("transform: ") + which + " matrix has non-finite entries");
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const double v = a(r, c);
      const bool same_component = r % m == c % m;
      if (r == c) {
        if (v != 1.0) throw DomainError(std::string("transform: ") + which + " matrix must be unit diagonal");
      } else if (c > r || !same_component || r / m == c / m) {
        if (v != 0.0) {
          throw DomainError(std::string("transform: ") + which +
                            " matrix must be lower triangular with diagonal blocks");
        }
      } else if (kind == TransformKind::Identity && v != 0.0) {
        throw DomainError(std::string("transform: identity kind with non-zero ") + which + " coefficient");
      } else if (kind == TransformKind::Toeplitz) {
        const int lag = r / m - c / m;
        if (v != a(lag * m + r % m, r % m)) {
          throw DomainError(std::string("transform: ") + which + " matrix is not block Toeplitz");
        }
      }
    }
  }
}

}  // namespace

const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Full: return "full";
    case TransformKind::Toeplitz: return "toeplitz";
    case TransformKind::Identity: return "identity";
    case TransformKind::PLT: return "plt";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(const std::string& text) {
  if (text == "full") return TransformKind::Full;
  if (text == "toeplitz") return TransformKind::Toeplitz;
  if (text == "identity") return TransformKind::Identity;
  if (text == "plt") return TransformKind::PLT;
  throw DomainError("unknown transform kind '" + text + "'");
}

CausalTransform::CausalTransform(TransformKind kind, int frame_length, int block_dim, Matrix encoder,
                                 Matrix decoder)
    : kind_(kind),
      frame_length_(frame_length),
      block_dim_(block_dim),
      encoder_(std::move(encoder)),
      decoder_(std::move(decoder)) {
  const Matrix id = Matrix::Identity(encoder_.rows(), encoder_.cols());
  encoder_inverse_ = encoder_.triangularView<Eigen::UnitLower>().solve(id);
}

std::size_t CausalTransform::parameter_count(TransformKind kind, int frame_length, int block_dim) {
  check_dims(frame_length, block_dim);
  const auto n = static_cast<std::size_t>(frame_length);
  const auto m = static_cast<std::size_t>(block_dim);
  switch (kind) {
    case TransformKind::Identity: return 0;
    case TransformKind::Toeplitz: return m * (n - 1);
    case TransformKind::Full:
    case TransformKind::PLT: return m * n * (n - 1) / 2;
  }
  return 0;
}

CausalTransform CausalTransform::identity(int frame_length, int block_dim) {
  check_dims(frame_length, block_dim);
  const int dim = frame_length * block_dim;
  return CausalTransform(TransformKind::Identity, frame_length, block_dim, Matrix::Identity(dim, dim),
                         Matrix::Identity(dim, dim));
}

CausalTransform CausalTransform::from_parameters(TransformKind kind, int frame_length, int block_dim,
                                                 std::span<const double> encoder, std::span<const double> decoder) {
  const std::size_t count = parameter_count(kind, frame_length, block_dim);
  if (encoder.size() != count || decoder.size() != count) {
    throw DomainError("transform: expected " + std::to_string(count) + " coefficients per matrix");
  }
  for (double v : encoder) {
    if (!std::isfinite(v)) throw DomainError("transform: non-finite coefficient");
  }
  for (double v : decoder) {
    if (!std::isfinite(v)) throw DomainError("transform: non-finite coefficient");
  }
  if (kind == TransformKind::PLT && !std::equal(encoder.begin(), encoder.end(), decoder.begin())) {
    throw DomainError("transform: PLT requires identical encoder and decoder");
  }
  return CausalTransform(kind, frame_length, block_dim, build(kind, frame_length, block_dim, encoder),
                         build(kind, frame_length, block_dim, decoder));
}

CausalTransform CausalTransform::from_matrices(TransformKind kind, int frame_length, int block_dim, Matrix encoder,
                                               Matrix decoder) {
  check_dims(frame_length, block_dim);
  validate_structure(kind, frame_length, block_dim, encoder, "encoder");
  validate_structure(kind, frame_length, block_dim, decoder, "decoder");
  if (kind == TransformKind::PLT && encoder != decoder) {
    throw DomainError("transform: PLT requires identical encoder and decoder");
  }
  return CausalTransform(kind, frame_length, block_dim, std::move(encoder), std::move(decoder));
}

std::vector<double> CausalTransform::parameters_of(const Matrix& a) const {
  const int n = frame_length_;
  const int m = block_dim_;
  std::vector<double> out;
  out.reserve(parameter_count(kind_, n, m));
  if (kind_ == TransformKind::Toeplitz) {
    for (int lag = 1; lag < n; ++lag) {
      for (int k = 0; k < m; ++k) out.push_back(a(lag * m + k, k));
    }
  } else if (kind_ != TransformKind::Identity) {
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        for (int k = 0; k < m; ++k) out.push_back(a(j * m + k, i * m + k));
      }
    }
  }
  return out;
}

TransformPair assemble(const CausalTransform& transform) { return {transform.encoder(), transform.decoder()}; }

PltDesign plt_design(const CovarianceMatrix& k_x, int block_dim) {
  if (block_dim < 1 || k_x.dim() % block_dim != 0) {
    throw DomainError("plt_design: covariance dimension is not a multiple of the block dim");
  }
  const int m = block_dim;
  const int n = static_cast<int>(k_x.dim()) / m;
  Matrix a = Matrix::Identity(n * m, n * m);
  std::vector<double> variances(static_cast<std::size_t>(n * m));
  for (int k = 0; k < m; ++k) {
    Matrix sub(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) sub(i, j) = k_x(i * m + k, j * m + k);
    }
    const UnitLdl ldl = unit_ldl(sub);
    for (int i = 0; i < n; ++i) {
      variances[static_cast<std::size_t>(i * m + k)] = ldl.diagonal(i);
      for (int j = 0; j < i; ++j) a(i * m + k, j * m + k) = ldl.unit_lower(i, j);
    }
  }
  Matrix decoder = a;
  return {CausalTransform::from_matrices(TransformKind::PLT, n, m, std::move(a), std::move(decoder)),
          std::move(variances)};
}

std::vector<double> fine_quantization_input_variances(const CausalTransform& transform, const Matrix& k_x) {
  if (k_x.rows() != transform.dim() || k_x.cols() != transform.dim()) {
    throw DomainError("input variances: covariance dimension mismatch");
  }
  const Matrix& g = transform.encoder_inverse();
  const Vector d = (g * k_x * g.transpose()).diagonal();
  return {d.data(), d.data() + d.size()};
}

EncodedFrame encode(std::span<const double> frame, const CausalTransform& transform, const QuantizerBank& bank,
                    Rng& rng) {
  const int n = transform.frame_length();
  const int m = transform.block_dim();
  if (frame.size() != static_cast<std::size_t>(n * m)) throw DomainError("encode: frame length mismatch");
  if (bank.count() != static_cast<std::size_t>(n) || bank.block_dim() != static_cast<std::size_t>(m)) {
    throw DomainError("encode: quantizer bank does not match the transform");
  }
  const Matrix& a = transform.encoder();
  EncodedFrame out;
  out.codevalues = Vector::Zero(n * m);
  out.quantizer_inputs = Vector::Zero(n * m);
  out.indices.assign(static_cast<std::size_t>(n * m), -1);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < m; ++k) {
      const int s = t * m + k;
      double d = frame[static_cast<std::size_t>(s)];
      for (int j = 0; j < t; ++j) d -= a(s, j * m + k) * out.codevalues(j * m + k);
      const auto q = bank.apply(static_cast<std::size_t>(s), d, rng);
      out.quantizer_inputs(s) = d;
      out.codevalues(s) = q.reconstruction;
      out.indices[static_cast<std::size_t>(s)] = q.index;
    }
  }
  return out;
}

Vector decode(std::span<const double> codevalues, const CausalTransform& transform, const AvailabilityMatrix& b) {
  const int n = transform.frame_length();
  const int m = transform.block_dim();
  if (codevalues.size() != static_cast<std::size_t>(n * m)) throw DomainError("decode: frame length mismatch");
  if (b.dim() != n) throw DomainError("decode: availability matrix dimension mismatch");
  const Matrix& ah = transform.decoder();
  Vector out = Vector::Zero(n * m);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < m; ++k) {
      const int s = t * m + k;
      double acc = 0.0;
      for (int j = 0; j <= t; ++j) {
        if (b(t, j)) acc += ah(s, j * m + k) * codevalues[static_cast<std::size_t>(j * m + k)];
      }
      out(s) = acc;
    }
  }
  return out;
}

EquivalentChannel equivalent_channel(const CausalTransform& transform, const AvailabilityMatrix& b) {
  if (b.dim() != transform.frame_length()) throw DomainError("equivalent_channel: dimension mismatch");
  const Matrix h = transform.decoder().cwiseProduct(b.expanded(transform.block_dim()));
  Matrix h_eq = h * transform.encoder_inverse();
  return {h_eq, h_eq};
}

void write_transform(std::ostream& os, const CausalTransform& transform) {
  os << "# rctc-transform v1\n";
  os << "kind " << to_string(transform.kind()) << '\n';
  os << "frame_length " << transform.frame_length() << '\n';
  os << "block_dim " << transform.block_dim() << '\n';
  auto dump = [&os](const char* name, const Matrix& a) {
    os << name << '\n';
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) os << (c ? " " : "") << format_double(a(r, c));
      os << '\n';
    }
  };
  dump("encoder", transform.encoder());
  dump("decoder", transform.decoder());
}

CausalTransform read_transform(std::istream& is) {
  std::string line;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (!line.empty() && line.front() != '#') return line;
    }
    throw DomainError("read_transform: unexpected end of input");
  };
  auto keyed = [&](const std::string& key) {
    std::istringstream ss(next());
    std::string k, v;
    ss >> k >> v;
    if (k != key) throw DomainError("read_transform: expected '" + key + "'");
    return v;
  };
  const TransformKind kind = transform_kind_from_string(keyed("kind"));
  const int n = std::stoi(keyed("frame_length"));
  const int m = std::stoi(keyed("block_dim"));
  check_dims(n, m);
  auto matrix = [&](const std::string& name) {
    if (next() != name) throw DomainError("read_transform: expected '" + name + "'");
    Matrix a(n * m, n * m);
    for (int r = 0; r < n * m; ++r) {
      std::istringstream ss(next());
      std::string tok;
      for (int c = 0; c < n * m; ++c) {
        if (!(ss >> tok)) throw DomainError("read_transform: short matrix row");
        a(r, c) = parse_double(tok);
      }
    }
    return a;
  };
  Matrix enc = matrix("encoder");
  Matrix dec = matrix("decoder");
  return CausalTransform::from_matrices(kind, n, m, std::move(enc), std::move(dec));
}

}  // namespace rctc
