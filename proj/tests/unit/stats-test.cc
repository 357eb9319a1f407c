// tests/unit/stats-test.cc

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "digitvec/error.h"
#include "digitvec/hmm.h"
#include "digitvec/linalg.h"
#include "digitvec/stats.h"
#include "doctest.h"

namespace digitvec {

namespace {

DigitHmm RandomHmm(Rng *rng, int num_states, int num_comp, int dim) {
  DigitHmm h;
  h.digit = 3;
  for (int s = 0; s < num_states; ++s) {
    DiagGmm g;
    g.weights = Vector::Constant(num_comp, 1.0 / num_comp);
    g.means.resize(num_comp, dim);
    g.variances.resize(num_comp, dim);
    for (int c = 0; c < num_comp; ++c)
      for (int j = 0; j < dim; ++j) {
        g.means(c, j) = 2.0 * rng->Normal();
        g.variances(c, j) = 0.5 + rng->Uniform();
      }
    h.states.push_back(g);
  }
  h.transitions = Matrix::Identity(num_states, num_states);
  h.occupancy = Vector::Ones(num_states);
  return h;
}

}  // namespace

TEST_CASE("single component states give unit posteriors") {
  Rng rng(1);
  DigitHmm h = RandomHmm(&rng, 3, 1, 2);
  Matrix frames = Matrix::Random(6, 2);
  PosteriorMatrix post = FramePosteriors(frames, {0, 0, 1, 1, 2, 2}, h);
  CHECK(post.gamma.rows() == 6);
  CHECK(post.gamma.cols() == 3);
  for (int t = 0; t < 6; ++t) CHECK(post.gamma(t, t / 2) == 1.0);
}

TEST_CASE("frame at a component mean dominates") {
  DigitHmm h;
  h.digit = 0;
  DiagGmm g;
  g.weights = Vector::Constant(2, 0.5);
  g.means.resize(2, 1);
  g.means << 0.0, 20.0;
  g.variances = Matrix::Ones(2, 1);
  h.states.push_back(g);
  h.transitions = Matrix::Ones(1, 1);
  PosteriorMatrix post = FramePosteriors(Matrix::Zero(1, 1), {0}, h);
  CHECK(post.gamma(0, 0) > 0.999);
}

TEST_CASE("posterior rows sum to one") {
  Rng rng(2);
  DigitHmm h = RandomHmm(&rng, 2, 4, 3);
  Matrix frames(8, 3);
  for (int t = 0; t < 8; ++t) frames.row(t) = 2.0 * rng.NormalVector(3).transpose();
  PosteriorMatrix post = FramePosteriors(frames, {0, 0, 0, 1, 1, 1, 1, 1}, h);
  for (int t = 0; t < 8; ++t) {
    CHECK(post.gamma.row(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Components of other states get no mass.
    const int other = t < 3 ? 4 : 0;
    CHECK(post.gamma.row(t).segment(other, 4).sum() == 0.0);
  }
}

TEST_CASE("statistics of a frame at the component mean") {
  Rng rng(3);
  DigitHmm h = RandomHmm(&rng, 1, 1, 2);
  FlatGmm flat = FlattenHmm(h);
  Matrix frames = flat.gmm.means.row(0);
  PosteriorMatrix post = FramePosteriors(frames, {0}, h);
  BaumWelchStats st = AccumulateStats(frames, post, flat);
  CHECK(st.zero_order[0] == 1.0);
  CHECK(st.first_order.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("statistics match a naive double loop and are linear") {
  Rng rng(4);
  DigitHmm h = RandomHmm(&rng, 2, 3, 4);
  FlatGmm flat = FlattenHmm(h);
  Matrix frames(10, 4);
  for (int t = 0; t < 10; ++t) frames.row(t) = rng.NormalVector(4).transpose();
  std::vector<int> states = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  PosteriorMatrix post = FramePosteriors(frames, states, h);
  BaumWelchStats st = AccumulateStats(frames, post, flat);
  for (int c = 0; c < 6; ++c) {
    double n = 0.0;
    for (int t = 0; t < 10; ++t) n += post.gamma(t, c);
    CHECK(std::abs(st.zero_order[c] - n) < 1e-12);
    for (int j = 0; j < 4; ++j) {
      double f = 0.0;
      for (int t = 0; t < 10; ++t) f += post.gamma(t, c) * (frames(t, j) - flat.gmm.means(c, j));
      CHECK(std::abs(st.first_order[c * 4 + j] - f) < 1e-12);
    }
  }

  Matrix doubled(20, 4);
  std::vector<int> states2;
  for (int t = 0; t < 10; ++t) {
    doubled.row(2 * t) = frames.row(t);
    doubled.row(2 * t + 1) = frames.row(t);
    states2.push_back(states[t]);
    states2.push_back(states[t]);
  }
  BaumWelchStats st2 = AccumulateStats(doubled, FramePosteriors(doubled, states2, h), flat);
  CHECK((st2.zero_order - 2.0 * st.zero_order).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((st2.first_order - 2.0 * st.first_order).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shape errors") {
  Rng rng(5);
  DigitHmm h = RandomHmm(&rng, 2, 1, 2);
  CHECK_THROWS_AS(FramePosteriors(Matrix::Zero(3, 2), {0, 1}, h), ShapeError);
  BaumWelchStats a, b;
  a.zero_order = Vector::Zero(2);
  a.first_order = Vector::Zero(4);
  b.zero_order = Vector::Zero(3);
  b.first_order = Vector::Zero(6);
  CHECK_THROWS_AS(a += b, ShapeError);
}

}  // namespace digitvec
