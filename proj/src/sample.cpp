#include "rsc/sample.hpp"

#include "internal.hpp"
#include "rsc/error.hpp"
#include "rsc/random.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace rsc {

std::string_view
to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::UnparseableFile: return "UnparseableFile";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateBandwidth: return "DegenerateBandwidth";
    case ErrorCode::NoAnalyticForm: return "NoAnalyticForm";
    case ErrorCode::TooFewDistinctValues: return "TooFewDistinctValues";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
  }
  return "Unknown";
}

bool
is_data_error(ErrorCode code) noexcept
{
  return code == ErrorCode::MissingColumn || code == ErrorCode::EmptyAfterFiltering ||
         code == ErrorCode::UnparseableFile;
}

Sample::Sample(std::vector<double> values)
  : values_(std::move(values))
{
  const std::size_t n = values_.size();
  if (n < 2)
    detail::fail(ErrorCode::TooFewObservations,
                 "a sample needs at least 2 observations, got " + std::to_string(n));
  for (double v : values_)
    if (!std::isfinite(v))
      detail::fail(ErrorCode::InvalidArgument, "sample contains a non-finite value");

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{ 0 });
  std::stable_sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
    return values_[a] < values_[b];
  });
  sorted_.resize(n);
  rank_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted_[k] = values_[order_[k]];
    rank_[order_[k]] = k;
  }
  // moments are accumulated in sorted order so they are permutation invariant
  mean_ = detail::mean_of(sorted_);
  variance_ = detail::sum_sq_dev(sorted_, mean_) / static_cast<double>(n);
}

LeaveOneOutView
Sample::leave_one_out(std::size_t j) const
{
  return LeaveOneOutView(*this, j);
}

LeaveOneOutView::LeaveOneOutView(const Sample& parent, std::size_t excluded)
  : parent_(&parent)
  , excluded_(excluded)
{
  if (excluded >= parent.size())
    detail::fail(ErrorCode::IndexOutOfRange,
                 "leave-one-out index " + std::to_string(excluded) + " out of range for n=" +
                   std::to_string(parent.size()));
  excluded_rank_ = parent.rank_of(excluded);
}

double
LeaveOneOutView::mean() const
{
  detail::CompensatedSum s;
  const auto sorted = parent_->sorted();
  for (std::size_t k = 0; k < sorted.size(); ++k)
    if (k != excluded_rank_)
      s.add(sorted[k]);
  return s.value() / static_cast<double>(size());
}

void
LeaveOneOutView::copy_sorted(std::vector<double>& out) const
{
  const auto sorted = parent_->sorted();
  out.resize(sorted.size() - 1);
  std::copy(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(excluded_rank_), out.begin());
  std::copy(sorted.begin() + static_cast<std::ptrdiff_t>(excluded_rank_) + 1,
            sorted.end(),
            out.begin() + static_cast<std::ptrdiff_t>(excluded_rank_));
}

Dataset::Dataset(std::string outcome_name_,
                 Sample outcome_,
                 Eigen::MatrixXd covariates_,
                 std::vector<std::string> covariate_names_)
  : outcome_name(std::move(outcome_name_))
  , outcome(std::move(outcome_))
  , covariates(std::move(covariates_))
  , covariate_names(std::move(covariate_names_))
{
  if (static_cast<std::size_t>(covariates.rows()) != outcome.size())
    detail::fail(ErrorCode::InvalidArgument, "covariate rows do not match outcome size");
  if (static_cast<std::size_t>(covariates.cols()) != covariate_names.size())
    detail::fail(ErrorCode::InvalidArgument, "covariate names do not match column count");
}

// ---------------------------------------------------------------------------
// CSV

namespace {

using Record = std::vector<std::string>;

// Splits the whole file into records; quoted fields may contain separators,
// doubled quotes and line breaks.
std::vector<Record>
parse_records(const std::string& text, const std::string& origin)
{
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0)
    i = 3;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty()))
      records.push_back(std::move(record));
    record.clear();
  };

  for (; i < n; ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          detail::fail(ErrorCode::UnparseableFile, origin + ": stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n')
          ++i;
        end_record();
        break;
      case '\n': end_record(); break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted)
    detail::fail(ErrorCode::UnparseableFile, origin + ": unterminated quoted field");
  if (field_started || !field.empty() || !record.empty())
    end_record();
  return records;
}

std::string_view
trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

bool
parse_number(std::string_view s, double& out)
{
  s = trim(s);
  if (s.empty())
    return false;
  if (s.front() == '+')
    s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string
format_number(double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace

Dataset
load_csv(const std::filesystem::path& path,
         const std::string& outcome_col,
         const std::vector<std::string>& covariate_cols)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    detail::fail(ErrorCode::UnparseableFile, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto records = parse_records(buf.str(), path.string());
  if (records.empty())
    detail::fail(ErrorCode::UnparseableFile, path.string() + ": no header row");

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < records[0].size(); ++c)
    column.emplace(std::string(trim(records[0][c])), c);
  auto locate = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end())
      detail::fail(ErrorCode::MissingColumn, path.string() + ": no column named '" + name + "'");
    return it->second;
  };
  std::vector<std::size_t> wanted{ locate(outcome_col) };
  for (const auto& name : covariate_cols)
    wanted.push_back(locate(name));

  std::vector<double> y;
  std::vector<double> x;
  std::size_t dropped = 0;
  std::vector<double> row(wanted.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < wanted.size() && ok; ++c)
      ok = wanted[c] < records[r].size() && parse_number(records[r][wanted[c]], row[c]);
    if (!ok) {
      ++dropped;
      continue;
    }
    y.push_back(row[0]);
    x.insert(x.end(), row.begin() + 1, row.end());
  }
  if (y.size() < 2)
    detail::fail(ErrorCode::EmptyAfterFiltering,
                 path.string() + ": " + std::to_string(y.size()) + " usable rows after dropping " +
                   std::to_string(dropped));

  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(covariate_cols.size());
  Eigen::MatrixXd cov(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < p; ++c)
      cov(i, c) = x[static_cast<std::size_t>(i * p + c)];
  Dataset data(outcome_col, Sample(std::move(y)), std::move(cov), covariate_cols);
  data.dropped_rows = dropped;
  return data;
}

void
write_csv(const Dataset& data, const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    detail::fail(ErrorCode::UnparseableFile, "cannot write " + path.string());
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
      return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"')
        q += '"';
      q += c;
    }
    return q + '"';
  };
  out << quote(data.outcome_name);
  for (const auto& name : data.covariate_names)
    out << ',' << quote(name);
  out << '\n';
  const auto y = data.outcome.values();
  for (std::size_t i = 0; i < y.size(); ++i) {
    out << format_number(y[i]);
    for (Eigen::Index c = 0; c < data.covariates.cols(); ++c)
      out << ',' << format_number(data.covariates(static_cast<Eigen::Index>(i), c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic designs

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Draw
{
  double x, u, z;
  bool d;
};

inline Draw
draw_one(const Philox4x32& gen, std::uint64_t stream, std::uint64_t i)
{
  const auto b0 = gen(stream, 2 * i);
  const auto b1 = gen(stream, 2 * i + 1);
  auto word = [](std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
  };
  const double ux = to_unit(word(b0[0], b0[1]));
  const double u1 = 1.0 - to_unit(word(b0[2], b0[3])); // (0, 1]
  const double u2 = to_unit(word(b1[0], b1[1]));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return { ux, r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2), (b1[3] >> 31) != 0 };
}

inline double
outcome_of(const DgpModel& model, const Draw& w)
{
  const double x = w.x + model.shift;
  switch (model.kind) {
    case DgpModel::Kind::LocationScale: return 20.0 + x + (1.0 + x) * w.u;
    case DgpModel::Kind::LocationBimodal: {
      const double mix = w.d ? (-4.0 + w.u * (2.0 - x)) : (4.0 + w.z * (2.0 - x));
      return 20.0 + x + mix / 5.0;
    }
  }
  return 0.0;
}

} // namespace

std::vector<double>
dgp_outcomes(const DgpModel& model, std::size_t n, std::uint64_t seed, std::uint64_t stream)
{
  if (n < 2)
    detail::fail(ErrorCode::TooFewObservations, "dgp_draw needs n >= 2");
  const Philox4x32 gen(seed);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = outcome_of(model, draw_one(gen, stream, i));
  return y;
}

Dataset
dgp_draw(const DgpModel& model, std::size_t n, std::uint64_t seed, std::uint64_t stream)
{
  if (n < 2)
    detail::fail(ErrorCode::TooFewObservations, "dgp_draw needs n >= 2");
  const Philox4x32 gen(seed);
  std::vector<double> y(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Draw w = draw_one(gen, stream, i);
    y[i] = outcome_of(model, w);
    x(static_cast<Eigen::Index>(i), 0) = w.x + model.shift;
  }
  return Dataset("y", Sample(std::move(y)), std::move(x), { "x" });
}

} // namespace rsc
