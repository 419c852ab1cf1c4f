#include "postedit/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "postedit/text.hpp"

namespace postedit {

namespace {

using json = nlohmann::json;

// Guards truncation against binary representation error, e.g. 4.58 * 100
// landing at 457.99999999999994.
constexpr double kTruncationSlack = 1e-9;

std::size_t char_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Lexicographic (word edits, character edits) cost.
struct Cost {
  std::size_t edits = 0;
  std::size_t chars = 0;

  Cost operator+(const Cost& o) const { return {edits + o.edits, chars + o.chars}; }
  friend bool operator==(const Cost&, const Cost&) = default;
  friend auto operator<=>(const Cost&, const Cost&) = default;
};

}  // namespace

std::string_view to_string(Rounding mode) { return mode == Rounding::truncated ? "truncated" : "full"; }

Rounding parse_rounding(std::string_view name) {
  if (name == "truncated") return Rounding::truncated;
  if (name == "full") return Rounding::full;
  throw std::invalid_argument(fmt::format("unknown rounding mode '{}'", name));
}

ErrorAnnotation ErrorAnnotation::from_json(std::string_view json_text) {
  const auto doc = json::parse(json_text);
  ErrorAnnotation a;
  a.transcript_id = doc.at("transcript_id").get<std::string>();
  a.total_words = doc.at("total_words").get<std::size_t>();
  for (const auto& e : doc.at("errors")) {
    AnnotatedError err;
    err.word_index = e.at("index").get<std::size_t>();
    err.surface = e.at("word").get<std::string>();
    if (auto it = e.find("correct"); it != e.end() && !it->is_null()) {
      err.correct = it->get<std::string>();
    }
    a.errors.push_back(std::move(err));
  }
  for (std::size_t i = 1; i < a.errors.size(); ++i) {
    if (a.errors[i].word_index <= a.errors[i - 1].word_index) {
      throw std::invalid_argument(
          fmt::format("annotation {}: word indices must be strictly increasing", a.transcript_id));
    }
  }
  return a;
}

ErrorAnnotation ErrorAnnotation::load(const std::filesystem::path& path) {
  try {
    return from_json(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void ErrorAnnotation::validate(std::span<const std::string> words) const {
  std::optional<std::size_t> prev;
  for (const auto& e : errors) {
    if (prev && e.word_index <= *prev) {
      throw std::invalid_argument(
          fmt::format("annotation {}: word indices must be strictly increasing", transcript_id));
    }
    if (e.word_index >= words.size()) {
      throw std::invalid_argument(fmt::format("annotation {}: index {} outside transcript of {} words",
                                              transcript_id, e.word_index, words.size()));
    }
    if (words[e.word_index] != e.surface) {
      throw std::invalid_argument(fmt::format("annotation {}: word {} is '{}', annotation says '{}'",
                                              transcript_id, e.word_index, words[e.word_index],
                                              e.surface));
    }
    prev = e.word_index;
  }
}

std::size_t count_errors_annotated(const ErrorAnnotation& annotation) {
  return annotation.errors.size();
}

std::size_t count_errors_aligned(std::span<const std::string> hypothesis,
                                 std::span<const std::string> reference) {
  if (hypothesis.empty() || reference.empty()) {
    throw std::invalid_argument("count_errors_aligned: both transcripts must be non-empty");
  }
  std::vector<std::size_t> row(reference.size() + 1);
  for (std::size_t j = 0; j <= reference.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= hypothesis.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (hypothesis[i - 1] == reference[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[reference.size()];
}

std::size_t count_errors_aligned(std::string_view hypothesis, std::string_view reference) {
  const auto h = split_words(hypothesis);
  const auto r = split_words(reference);
  return count_errors_aligned(std::span<const std::string>(h), std::span<const std::string>(r));
}

std::vector<AlignmentStep> align_words(std::span<const std::string> source,
                                       std::span<const std::string> target) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  std::vector<std::u32string> src(n), tgt(m);
  for (std::size_t i = 0; i < n; ++i) src[i] = decode_utf8(source[i]);
  for (std::size_t j = 0; j < m; ++j) tgt[j] = decode_utf8(target[j]);

  const auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  std::vector<Cost> cost((n + 1) * (m + 1));
  for (std::size_t i = 1; i <= n; ++i) cost[at(i, 0)] = cost[at(i - 1, 0)] + Cost{1, src[i - 1].size()};
  for (std::size_t j = 1; j <= m; ++j) cost[at(0, j)] = cost[at(0, j - 1)] + Cost{1, tgt[j - 1].size()};

  const auto diag_cost = [&](std::size_t i, std::size_t j) {
    if (source[i - 1] == target[j - 1]) return Cost{};
    return Cost{1, char_distance(src[i - 1], tgt[j - 1])};
  };

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Cost d = cost[at(i - 1, j - 1)] + diag_cost(i, j);
      const Cost del = cost[at(i - 1, j)] + Cost{1, src[i - 1].size()};
      const Cost ins = cost[at(i, j - 1)] + Cost{1, tgt[j - 1].size()};
      cost[at(i, j)] = std::min({d, del, ins});
    }
  }

  std::vector<AlignmentStep> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && cost[at(i, j)] == cost[at(i - 1, j - 1)] + diag_cost(i, j)) {
      const EditOp op = source[i - 1] == target[j - 1] ? EditOp::match : EditOp::substitute;
      steps.push_back({op, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && cost[at(i, j)] == cost[at(i - 1, j)] + Cost{1, src[i - 1].size()}) {
      steps.push_back({EditOp::erase, i - 1, std::nullopt});
      --i;
    } else {
      steps.push_back({EditOp::insert, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

std::vector<std::vector<std::string>> project_alignment(std::span<const std::string> source,
                                                        std::span<const std::string> target) {
  std::vector<std::vector<std::string>> spans(source.size());
  std::vector<std::string> pending;
  for (const auto& step : align_words(source, target)) {
    if (step.op == EditOp::insert) {
      pending.push_back(target[*step.target]);
      continue;
    }
    auto& span = spans[*step.source];
    span = std::move(pending);
    pending.clear();
    if (step.target) span.push_back(target[*step.target]);
  }
  if (!pending.empty()) {
    if (spans.empty()) {
      spans.emplace_back();
    }
    auto& last = spans.back();
    last.insert(last.end(), pending.begin(), pending.end());
  }
  return spans;
}

std::size_t count_fixed_errors(const ErrorAnnotation& annotation, std::span<const std::string> before,
                               std::span<const std::string> after) {
  annotation.validate(before);
  if (before.empty()) return 0;
  const auto spans = project_alignment(before, after);
  std::size_t fixed = 0;
  for (const auto& e : annotation.errors) {
    if (!e.correct) continue;
    if (join_words(spans[e.word_index]) == join_words(split_words(*e.correct))) ++fixed;
  }
  return fixed;
}

double truncate_decimals(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + kTruncationSlack) / scale;
}

double error_rate(std::size_t errors, std::size_t total_words, Rounding mode) {
  if (total_words == 0) throw std::invalid_argument("error_rate: total_words must be > 0");
  const double rate = static_cast<double>(errors) / static_cast<double>(total_words);
  return mode == Rounding::truncated ? truncate_decimals(rate, 3) : rate;
}

std::optional<double> improvement(double e_before, double e_after, Rounding mode) {
  if (e_after <= 0.0) return std::nullopt;
  const double ratio = e_before / e_after;
  return mode == Rounding::truncated ? truncate_decimals(ratio, 2) : ratio;
}

ErrorReport make_report(std::string label, std::size_t total_words, std::size_t errors_before,
                        std::size_t errors_after, Rounding mode) {
  ErrorReport r;
  r.label = std::move(label);
  r.total_words = total_words;
  r.errors_before = errors_before;
  r.errors_after = errors_after;
  r.e_before = error_rate(errors_before, total_words, mode);
  r.e_after = error_rate(errors_after, total_words, mode);
  r.improvement = improvement(r.e_before, r.e_after, mode);
  r.rounding = mode;
  return r;
}

ReportTable build_report(std::span<const DocumentCounts> documents, Rounding mode) {
  ReportTable table;
  table.rounding = mode;
  double sum = 0.0;
  std::size_t with_ratio = 0;
  for (const auto& d : documents) {
    auto row = make_report(d.label, d.total_words, d.errors_before, d.errors_after, mode);
    if (row.improvement) {
      sum += *row.improvement;
      ++with_ratio;
    }
    table.rows.push_back(std::move(row));
  }
  if (with_ratio > 0) {
    const double mean = sum / static_cast<double>(with_ratio);
    table.average_improvement = mode == Rounding::truncated ? truncate_decimals(mean, 2) : mean;
  }
  return table;
}

std::string format_percent(double ratio) {
  return fmt::format("{}%", static_cast<long long>(std::floor(ratio * 100.0 + kTruncationSlack)));
}

std::string format_rate(double rate, Rounding mode) {
  return mode == Rounding::truncated ? fmt::format("{:.1f}%", rate * 100.0)
                                 : fmt::format("{:.4f}%", rate * 100.0);
}

std::string format_ratio(const std::optional<double>& ratio, Rounding mode) {
  if (!ratio) return "all errors corrected";
  return mode == Rounding::truncated ? fmt::format("{:.2f} ({})", *ratio, format_percent(*ratio))
                                 : fmt::format("{:.4f} ({})", *ratio, format_percent(*ratio));
}

std::string render_text(const ReportTable& table) {
  constexpr std::size_t kLabelWidth = 34;
  std::vector<std::pair<std::string, std::vector<std::string>>> lines = {
      {"", {}},
      {"Total words", {}},
      {"Errors before post-editing", {}},
      {"Errors after post-editing", {}},
      {"Error rate before post-editing", {}},
      {"Error rate after post-editing", {}},
      {"Improvement ratio", {}},
  };
  for (const auto& r : table.rows) {
    lines[0].second.push_back(r.label);
    lines[1].second.push_back(std::to_string(r.total_words));
    lines[2].second.push_back(std::to_string(r.errors_before));
    lines[3].second.push_back(std::to_string(r.errors_after));
    lines[4].second.push_back(format_rate(r.e_before, table.rounding));
    lines[5].second.push_back(format_rate(r.e_after, table.rounding));
    lines[6].second.push_back(format_ratio(r.improvement, table.rounding));
  }
  std::vector<std::size_t> widths(table.rows.size(), 0);
  for (const auto& [_, cells] : lines) {
    for (std::size_t c = 0; c < cells.size(); ++c) widths[c] = std::max(widths[c], cells[c].size());
  }
  std::string out;
  for (const auto& [label, cells] : lines) {
    std::string line = fmt::format("{:<{}}", label, kLabelWidth);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      line += fmt::format("  {:<{}}", cells[c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  if (table.average_improvement) {
    out += fmt::format("{:<{}}  {}\n", "Average improvement", kLabelWidth,
                       format_ratio(table.average_improvement, table.rounding));
  }
  out += fmt::format("{:<{}}  {}\n", "Rounding", kLabelWidth, to_string(table.rounding));
  return out;
}

std::string render_csv(const ReportTable& table) {
  const bool truncated = table.rounding == Rounding::truncated;
  const auto rate = [&](double v) { return truncated ? fmt::format("{:.3f}", v) : fmt::format("{:.6f}", v); };
  const auto ratio = [&](const std::optional<double>& v) {
    if (!v) return std::string("all-corrected");
    return truncated ? fmt::format("{:.2f}", *v) : fmt::format("{:.6f}", *v);
  };
  std::string out =
      "document,total_words,errors_before,errors_after,error_rate_before,error_rate_after,"
      "improvement_ratio\n";
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.label, r.total_words, r.errors_before,
                       r.errors_after, rate(r.e_before), rate(r.e_after), ratio(r.improvement));
  }
  if (table.average_improvement) out += fmt::format("average,,,,,,{}\n", ratio(table.average_improvement));
  return out;
}

}  // namespace postedit
