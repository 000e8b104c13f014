#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <span>
#include <string>
#include <vector>

namespace rsc {

class LeaveOneOutView;

//! Empirical distribution of a real-valued outcome. Immutable after
//! construction; keeps a stable sort order and the plug-in moments.
class Sample
{
public:
  //! Throws TooFewObservations for n < 2 and InvalidArgument for
  //! non-finite values.
  explicit Sample(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }

  //! Observations in original order.
  std::span<const double> values() const noexcept { return values_; }

  //! Observations in non-decreasing order.
  std::span<const double> sorted() const noexcept { return sorted_; }

  //! sort_index()[k] is the original position of the k-th smallest value.
  //! Ties keep their original relative order.
  std::span<const std::size_t> sort_index() const noexcept { return order_; }

  //! Sorted position of original observation j.
  std::size_t rank_of(std::size_t j) const { return rank_.at(j); }

  double mean() const noexcept { return mean_; }

  //! Plug-in variance (divisor n).
  double variance() const noexcept { return variance_; }

  //! Throws IndexOutOfRange unless j < n.
  LeaveOneOutView leave_one_out(std::size_t j) const;

private:
  std::vector<double> values_;
  std::vector<double> sorted_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

//! The sample with one observation removed. Holds a pointer to the parent,
//! which must outlive the view.
class LeaveOneOutView
{
public:
  class iterator
  {
  public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = double;
    using difference_type = std::ptrdiff_t;
    using pointer = const double*;
    using reference = double;

    iterator() = default;
    iterator(const LeaveOneOutView* view, std::size_t pos)
      : view_(view)
      , pos_(pos)
    {}

    double operator*() const { return (*view_)[pos_]; }
    iterator& operator++()
    {
      ++pos_;
      return *this;
    }
    iterator operator++(int)
    {
      auto tmp = *this;
      ++pos_;
      return tmp;
    }
    bool operator==(const iterator& other) const { return pos_ == other.pos_; }

  private:
    const LeaveOneOutView* view_ = nullptr;
    std::size_t pos_ = 0;
  };

  LeaveOneOutView(const Sample& parent, std::size_t excluded);

  std::size_t size() const noexcept { return parent_->size() - 1; }
  std::size_t excluded() const noexcept { return excluded_; }
  const Sample& parent() const noexcept { return *parent_; }

  //! k-th retained value in original order.
  double operator[](std::size_t k) const noexcept
  {
    return parent_->values()[k < excluded_ ? k : k + 1];
  }

  //! k-th smallest retained value.
  double sorted_at(std::size_t k) const noexcept
  {
    return parent_->sorted()[k < excluded_rank_ ? k : k + 1];
  }

  //! Sorted position of the excluded observation in the parent.
  std::size_t excluded_rank() const noexcept { return excluded_rank_; }

  iterator begin() const { return { this, 0 }; }
  iterator end() const { return { this, size() }; }

  double mean() const;

  //! Writes the retained values in sorted order into out (resized).
  void copy_sorted(std::vector<double>& out) const;

private:
  const Sample* parent_;
  std::size_t excluded_;
  std::size_t excluded_rank_;
};

//! Outcome plus a named covariate matrix, one row per observation.
struct Dataset
{
  std::string outcome_name;
  Sample outcome;
  Eigen::MatrixXd covariates;
  std::vector<std::string> covariate_names;
  //! Rows removed during ingestion because a used cell was missing.
  std::size_t dropped_rows = 0;

  Dataset(std::string outcome_name,
          Sample outcome,
          Eigen::MatrixXd covariates,
          std::vector<std::string> covariate_names);
};

//! Reads an RFC-4180 CSV with a header row. Rows with a missing or
//! non-numeric cell in any requested column are dropped and counted.
Dataset
load_csv(const std::filesystem::path& path,
         const std::string& outcome_col,
         const std::vector<std::string>& covariate_cols);

//! Writes outcome and covariates with shortest round-trip formatting.
void
write_csv(const Dataset& data, const std::filesystem::path& path);

//! Synthetic designs: Y = 20 + X' + W with X' = X + shift, X ~ U(0,1).
//!   LocationScale:   W = (1 + X') U
//!   LocationBimodal: W = (D(-4 + U(2 - X')) + (1 - D)(4 + Z(2 - X'))) / 5
//! U, Z ~ N(0,1), D ~ Bernoulli(1/2).
struct DgpModel
{
  enum class Kind
  {
    LocationScale,
    LocationBimodal
  };

  Kind kind = Kind::LocationScale;
  double shift = 0.0;
};

//! Draws n observations from one Philox stream. Observation i consumes
//! counter blocks 2i and 2i+1 regardless of the model or shift, so equal
//! (seed, stream) give common random numbers across shifts and models.
//! The covariate column holds X + shift.
Dataset
dgp_draw(const DgpModel& model, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

//! Outcome values only; avoids the covariate matrix for population draws.
std::vector<double>
dgp_outcomes(const DgpModel& model, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

} // namespace rsc
