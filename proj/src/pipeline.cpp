#include "postedit/pipeline.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "postedit/text.hpp"

namespace postedit {

namespace {

using json = nlohmann::json;

struct TokenOutcome {
  CorrectionRecord record;
  bool failed = false;
};

TokenOutcome process_token(const TokenWindow& token, SuggestionProvider& provider) {
  TokenOutcome out;
  out.record.token_index = token.index;
  out.record.original_text = token.text;
  try {
    auto s = provider.suggest(token.text);
    if (s && !s->corrected.empty() && s->corrected != token.text) {
      out.record.replacement_text = std::move(s->corrected);
      out.record.action = CorrectionAction::replaced;
    }
  } catch (const ProviderError& e) {
    out.failed = true;
    out.record.action = CorrectionAction::errored;
    out.record.error = e.what();
  }
  return out;
}

PostEditResult assemble(std::vector<TokenOutcome> outcomes, const PipelineConfig& config) {
  PostEditResult result;
  result.provider_calls = outcomes.size();
  result.records.reserve(outcomes.size());
  for (auto& o : outcomes) {
    if (o.failed && config.strict_provider_errors) {
      throw PipelineError(o.record.token_index, o.record.error, std::move(result.records));
    }
    result.records.push_back(std::move(o.record));
  }
  std::vector<std::string> pieces;
  pieces.reserve(result.records.size());
  for (const auto& r : result.records) pieces.push_back(r.output_text());
  result.corrected_text = concatenate(pieces);
  return result;
}

template <typename ProviderFor>
PostEditResult run_parallel(std::string_view text, const PipelineConfig& config, ProviderFor&& provider_for) {
  const auto tokens = tokenize(text, config.window);
  const auto ranges = partition_tokens(tokens.size(), config.workers);
  std::vector<TokenOutcome> outcomes(tokens.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(ranges.size());
    for (std::size_t w = 0; w < ranges.size(); ++w) {
      SuggestionProvider& provider = provider_for(w);
      workers.emplace_back([&outcomes, &tokens, &provider, range = ranges[w]] {
        for (std::size_t i = range.first; i < range.second; ++i) {
          outcomes[i] = process_token(tokens[i], provider);
        }
      });
    }
  }
  return assemble(std::move(outcomes), config);
}

}  // namespace

std::string_view to_string(CorrectionAction action) {
  switch (action) {
    case CorrectionAction::kept:
      return "kept";
    case CorrectionAction::replaced:
      return "replaced";
    case CorrectionAction::errored:
      return "errored";
  }
  return "kept";
}

void PipelineConfig::validate() const {
  if (window == 0) throw std::invalid_argument("window width must be >= 1");
  if (workers == 0) throw std::invalid_argument("worker count must be >= 1");
}

PipelineError::PipelineError(std::size_t token_index, const std::string& message,
                             std::vector<CorrectionRecord> records)
    : std::runtime_error("provider failure at token_index " + std::to_string(token_index) + ": " + message),
      token_index_(token_index),
      records_(std::move(records)) {}

PostEditResult post_edit(std::string_view text, SuggestionProvider& provider, const PipelineConfig& config) {
  config.validate();
  const auto tokens = tokenize(text, config.window);
  std::vector<TokenOutcome> outcomes;
  outcomes.reserve(tokens.size());
  for (const auto& token : tokens) {
    outcomes.push_back(process_token(token, provider));
    if (outcomes.back().failed && config.strict_provider_errors) break;
  }
  return assemble(std::move(outcomes), config);
}

PostEditResult post_edit_parallel(std::string_view text, SuggestionProvider& provider,
                                  const PipelineConfig& config) {
  config.validate();
  if (config.workers == 1) return post_edit(text, provider, config);
  if (!provider.concurrent_safe()) {
    throw std::invalid_argument("provider '" + std::string(provider.id()) +
                                "' is not safe for concurrent use; use one worker or a provider factory");
  }
  return run_parallel(text, config, [&](std::size_t) -> SuggestionProvider& { return provider; });
}

PostEditResult post_edit_parallel(std::string_view text, const ProviderFactory& factory,
                                  const PipelineConfig& config) {
  config.validate();
  std::vector<std::unique_ptr<SuggestionProvider>> providers;
  return run_parallel(text, config, [&](std::size_t) -> SuggestionProvider& {
    providers.push_back(factory());
    if (!providers.back()) throw std::invalid_argument("provider factory returned null");
    return *providers.back();
  });
}

PostEditResult run_post_edit(std::string_view text, SuggestionProvider& provider, const PipelineConfig& config) {
  return config.workers > 1 ? post_edit_parallel(text, provider, config) : post_edit(text, provider, config);
}

std::vector<std::pair<std::size_t, std::size_t>> partition_tokens(std::size_t tokens, std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("worker count must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const std::size_t used = std::min(tokens, workers);
  if (used == 0) return ranges;
  const std::size_t base = tokens / used;
  const std::size_t extra = tokens % used;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

std::string to_json_line(const CorrectionRecord& record) {
  json j = {
      {"token_index", record.token_index},
      {"original_text", record.original_text},
      {"replacement_text", record.replacement_text ? json(*record.replacement_text) : json(nullptr)},
      {"action", std::string(to_string(record.action))},
  };
  if (record.action == CorrectionAction::errored) j["error"] = record.error;
  return j.dump();
}

void write_audit(std::ostream& out, std::span<const CorrectionRecord> records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

CorrectionRecord record_from_json_line(std::string_view line) {
  const auto j = json::parse(line);
  CorrectionRecord r;
  r.token_index = j.at("token_index").get<std::size_t>();
  r.original_text = j.at("original_text").get<std::string>();
  if (const auto& rep = j.at("replacement_text"); !rep.is_null()) r.replacement_text = rep.get<std::string>();
  const auto action = j.at("action").get<std::string>();
  if (action == "kept") {
    r.action = CorrectionAction::kept;
  } else if (action == "replaced") {
    r.action = CorrectionAction::replaced;
  } else if (action == "errored") {
    r.action = CorrectionAction::errored;
    r.error = j.value("error", std::string());
  } else {
    throw std::invalid_argument("unknown correction action '" + action + "'");
  }
  return r;
}

}  // namespace postedit
