#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "conjauth/poly.hpp"

namespace conjauth {

// Ring endomorphism x_j -> f_j of the truncated polynomial ring. Every image
// has zero constant term (so the truncation ideal is preserved) and avoids
// the omitted variables, which makes the map non-invertible.
class Endomorphism {
 public:
  // Validates the invariants; throws InvalidParameter when broken.
  Endomorphism(RingPtr ring, std::vector<TruncatedPoly> images, std::vector<std::uint32_t> omitted);

  const RingPtr& ring() const { return ring_; }
  const std::vector<TruncatedPoly>& images() const { return images_; }
  const std::vector<std::uint32_t>& omitted() const { return omitted_; }
  std::uint32_t k0() const { return static_cast<std::uint32_t>(omitted_.size()); }

  // Variables the images may mention.
  std::vector<std::uint32_t> kept_variables() const;

  friend bool operator==(const Endomorphism& a, const Endomorphism& b) {
    return a.images_ == b.images_ && a.omitted_ == b.omitted_;
  }

 private:
  RingPtr ring_;
  std::vector<TruncatedPoly> images_;
  std::vector<std::uint32_t> omitted_;
};

// Images are `sparsity`-sparse with degree in [1, image_degree] over the
// k - k0 kept variables. Throws InvalidParameter unless 1 <= k0 < k.
Endomorphism endo_generate(const RingPtr& ring, std::uint32_t k0, std::uint32_t sparsity, Rng& rng,
                           std::uint32_t image_degree = 3);

TruncatedPoly endo_apply_poly(const Endomorphism& phi, const TruncatedPoly& a);

namespace detail {
class CompactIndex;
}

// Applies one endomorphism to many polynomials, sharing cached products of
// image powers between calls. Evaluation is Horner in the leading
// variables over a table of image products for the trailing ones, and
// drops every partial result that can only land at degree >= N.
class EndoEvaluator {
 public:
  explicit EndoEvaluator(const Endomorphism& phi);
  ~EndoEvaluator();
  EndoEvaluator(const EndoEvaluator&) = delete;
  EndoEvaluator& operator=(const EndoEvaluator&) = delete;

  TruncatedPoly apply(const TruncatedPoly& a);

 private:
  struct LeafProduct {
    TruncatedPoly poly;
    std::vector<std::uint32_t> index;
    std::vector<std::uint16_t> degree;
    std::vector<std::uint8_t> coeff;
  };
  using Buffer = std::vector<std::uint32_t>;

  std::uint32_t exponent(std::size_t term, std::uint32_t var) const;
  const LeafProduct& leaf_product(std::uint32_t idx);
  void sort_input(const TruncatedPoly& a);

  // Sparse route, for images over many variables.
  TruncatedPoly eval(std::size_t lo, std::size_t hi, std::uint32_t var, std::uint32_t budget);
  TruncatedPoly eval_leaves(std::size_t lo, std::size_t hi, std::uint32_t budget);

  // Dense route: coefficient arrays over the kept variables.
  void eval_dense(std::size_t lo, std::size_t hi, std::uint32_t var, std::uint32_t budget, Buffer& out);
  void clear_below(Buffer& buf, std::uint32_t limit) const;
  void reduce_below(Buffer& buf, std::uint32_t limit) const;
  Buffer acquire();
  void release(Buffer buf);

  const Endomorphism& phi_;
  const Ring& ring_;
  std::unique_ptr<detail::CompactIndex> out_index_;
  bool dense_ = false;
  // Cells of degree < N ordered by (degree, index); degree_start_[d] is the
  // first with degree d.
  std::vector<std::uint32_t> cells_by_degree_;
  std::vector<std::size_t> degree_start_;
  std::vector<Buffer> spare_;
  // Image terms in compact form, for dense Horner steps.
  struct ImageTerm {
    std::uint32_t index;
    std::uint32_t degree;
    std::uint8_t coeff;
  };
  std::vector<std::vector<ImageTerm>> image_terms_;
  std::vector<std::uint32_t> min_degree_;
  std::uint32_t leaf_vars_ = 1;
  std::uint32_t leaf_start_ = 0;
  std::vector<std::unique_ptr<LeafProduct>> leaf_table_;
  // Input terms sorted by their lexicographic key.
  std::vector<MonoKey> lex_;
  std::vector<std::uint8_t> coeff_;
};

// k x k matrix over Z_p; row j holds the degree-1 coefficients of f_j.
std::vector<std::vector<std::uint8_t>> endo_linear_part(const Endomorphism& phi);

// Rank of a matrix over Z_p by elimination.
std::size_t rank_mod_p(std::vector<std::vector<std::uint8_t>> rows, const Ring& ring);

}  // namespace conjauth
