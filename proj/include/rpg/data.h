// Copyright 2026 The RPG Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RPG_DATA_H_
#define RPG_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rpg {

// Row-major so that a single example is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// A labeled sample set: one feature row per example plus an integer class.
class LabeledSet {
 public:
  // Throws InvalidArgument unless rows and labels align, N >= 1 and every
  // label lies in [0, num_classes).
  LabeledSet(Matrix features, std::vector<int> labels, int num_classes);

  std::size_t size() const { return labels_.size(); }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  int num_classes() const { return num_classes_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  // Copies the listed rows, in the listed order.
  LabeledSet Subset(std::span<const std::size_t> indices) const;

  bool operator==(const LabeledSet& other) const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_;
};

// CSV layout: d numeric feature columns, then one integer label column.
// num_classes is max(label) + 1. Errors name the 1-based line number.
LabeledSet LoadCsv(const std::filesystem::path& path, bool has_header = false);
// Writes with 17 significant digits so LoadCsv reproduces the set exactly.
void SaveCsv(const LabeledSet& set, const std::filesystem::path& path);

// Gaussian blobs around fixed class centers.
//
// Class k has a dense unit-norm center whose coordinate j is
// (-1)^popcount((k + 1) & j) / sqrt(d) (a row of the Walsh-Hadamard matrix).
// When d is a power of two above k + 1 the centers are orthonormal.
// Each example is center + spread * N(0, I).
// Rows are class-interleaved: row i has label i mod num_classes.
LabeledSet SynthBlobs(int n_per_class, int num_classes, int dim, double spread,
                      uint64_t seed);
Vector BlobCenter(int label, int dim);

struct TrainTestSplit {
  LabeledSet train;
  LabeledSet test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

// Random partition of `set` into n_train and size() - n_train examples.
TrainTestSplit SplitTrainTest(const LabeledSet& set, std::size_t n_train,
                              uint64_t seed);

// Mini-batch schedule. Batch t (t >= 1) is a uniform sample of batch_size
// distinct indices drawn from the Philox stream (seed, StreamId(kBatch, t)),
// independently of every other iteration. Replaying from the same seed gives
// the same index sequence.
struct BatchSchedule {
  uint64_t seed = 0;
  std::size_t batch_size = 32;
};

std::vector<std::size_t> BatchIndices(const BatchSchedule& schedule,
                                      std::size_t set_size, int64_t t);
LabeledSet NextBatch(const LabeledSet& set, const BatchSchedule& schedule,
                     int64_t t);

// FNV-1a over an index list; used to check that twin runs see the same batches.
uint64_t HashIndices(std::span<const std::size_t> indices);

}  // namespace rpg

#endif  // RPG_DATA_H_
