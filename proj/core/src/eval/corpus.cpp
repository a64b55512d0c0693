#include "cogsr/eval/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/error.hpp"
#include "cogsr/util.hpp"

namespace cogsr::eval {

conditioning::CoTRecord oracle_eval_record(const EvalItem& item, const EvalCondition& c, const dsp::Waveform& degraded) {
  conditioning::RecordFacts f;
  f.f0_hz = item.labels.f0_hz;
  f.emotion = item.emotion;
  f.tokens = item.labels.tokens;
  f.cutoff_hz = c.cutoff_hz;
  f.snr_db = c.snr_db;
  if (std::isfinite(c.snr_db)) f.noise = c.noise;
  f.sample_rate = degraded.sample_rate;
  return conditioning::oracle_record(f);
}

std::uint64_t degradation_seed(const std::string& id, const EvalCondition& c, std::uint64_t seed) {
  std::ostringstream key;
  key << id << '|' << format_double(c.cutoff_hz) << '|' << format_double(c.snr_db) << '|' << dsp::to_string(c.noise);
  return fnv1a64(key.str(), seed);
}

MetricMeans mean_of(std::span<const UtteranceMetrics> rows) {
  MetricMeans m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.lsd += r.lsd;
    m.lsd_highband += r.lsd_highband;
    m.lsd_input += r.lsd_input;
    m.wer += r.wer;
    m.sim += r.sim;
    m.content_error_rate += r.content_error_rate;
  }
  const auto n = static_cast<double>(rows.size());
  m.lsd /= n;
  m.lsd_highband /= n;
  m.lsd_input /= n;
  m.wer /= n;
  m.sim /= n;
  m.content_error_rate /= n;
  return m;
}

MetricsReport evaluate_with(const Restorer& restorer, std::span<const EvalItem> items,
                            std::span<const EvalCondition> conditions, const EvalContext& ctx,
                            const EvalOptions& options) {
  if (items.empty()) throw ValidationError("evaluation needs at least one utterance");
  if (conditions.empty()) throw ValidationError("evaluation needs at least one condition");
  MetricsReport report;
  report.config_fingerprint = options.config_fingerprint;
  for (const auto& c : conditions) {
    ConditionReport cr;
    cr.condition = c;
    for (const auto& item : items) {
      try {
        if (!(c.cutoff_hz < item.hr.nyquist())) throw ValidationError("condition cutoff must be below Nyquist");
        const std::uint64_t seed = degradation_seed(item.id, c, options.seed);
        dsp::DegradationSpec d{c.cutoff_hz, c.snr_db, c.noise, seed};
        const auto lr = dsp::degrade(item.hr, d).audio;
        const auto record = ctx.records(item, c, lr);
        const auto out = restorer(lr, record, c, seed);
        UtteranceMetrics m;
        m.id = item.id;
        m.lsd = lsd(item.hr, out, options.lsd);
        m.lsd_highband = lsd_highband(item.hr, out, c.cutoff_hz, options.lsd);
        m.lsd_input = lsd(item.hr, lr, options.lsd);
        const auto hyp = classify_tokens(out, item.labels, ctx.bank);
        m.wer = wer(std::span<const int>(item.labels.tokens), std::span<const int>(hyp));
        m.content_error_rate = slot_error_rate(item.labels.tokens, hyp);
        m.sim = speaker_sim(proxy_speaker_embedding(item.hr, ctx.speaker_stats),
                            proxy_speaker_embedding(out, ctx.speaker_stats));
        cr.per_utterance.push_back(std::move(m));
      } catch (const Error& e) {
        spdlog::warn("evaluation of {} at cutoff {} Hz failed: {}", item.id, c.cutoff_hz, e.what());
        ++cr.failures;
        cr.failed_ids.push_back(item.id);
      }
    }
    const double fraction = static_cast<double>(cr.failures) / static_cast<double>(items.size());
    if (fraction > options.max_failure_fraction) {
      throw RuntimeFailure(std::to_string(cr.failures) + " of " + std::to_string(items.size()) +
                           " utterances failed at cutoff " + format_double(c.cutoff_hz) + " Hz");
    }
    cr.means = mean_of(cr.per_utterance);
    report.conditions.push_back(std::move(cr));
  }
  return report;
}

template <typename T>
MetricsReport evaluate_corpus(const flow::ModelState<T>& model, std::span<const EvalItem> items,
                              std::span<const EvalCondition> conditions, const EvalContext& ctx,
                              const EvalOptions& options) {
  const Restorer restorer = [&](const dsp::Waveform& lr, const conditioning::CoTRecord& record,
                                const EvalCondition& c, std::uint64_t seed) {
    flow::RestoreOptions ro;
    ro.steps = options.steps;
    ro.seed = seed;
    if (options.cutoff_hint) ro.cutoff_hz = c.cutoff_hz;
    return flow::restore(model, lr, record, ro).audio;
  };
  return evaluate_with(restorer, items, conditions, ctx, options);
}

template MetricsReport evaluate_corpus<float>(const flow::ModelState<float>&, std::span<const EvalItem>,
                                              std::span<const EvalCondition>, const EvalContext&,
                                              const EvalOptions&);
template MetricsReport evaluate_corpus<double>(const flow::ModelState<double>&, std::span<const EvalItem>,
                                               std::span<const EvalCondition>, const EvalContext&,
                                               const EvalOptions&);

namespace {

nlohmann::ordered_json metrics_json(const auto& m) {
  return {{"lsd", m.lsd},   {"lsd_highband", m.lsd_highband},
          {"lsd_input", m.lsd_input}, {"wer", m.wer},
          {"sim", m.sim},   {"content_error_rate", m.content_error_rate}};
}

std::string snr_text(double snr) { return std::isfinite(snr) ? format_double(snr) : "clean"; }

}  // namespace

std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["config_fingerprint"] = r.config_fingerprint;
  j["wer_source"] = "content-proxy";
  j["sim_source"] = "proxy-embedding";
  j["lsd_epsilon"] = kLsdEpsilon;
  j["conditions"] = nlohmann::ordered_json::array();
  for (const auto& c : r.conditions) {
    nlohmann::ordered_json cj;
    cj["cutoff_hz"] = c.condition.cutoff_hz;
    cj["snr_db"] = std::isfinite(c.condition.snr_db) ? nlohmann::ordered_json(c.condition.snr_db)
                                                     : nlohmann::ordered_json(nullptr);
    cj["noise"] = std::isfinite(c.condition.snr_db) ? dsp::to_string(c.condition.noise) : "none";
    cj["n"] = c.per_utterance.size();
    cj["failures"] = c.failures;
    cj["failed_ids"] = c.failed_ids;
    cj["means"] = metrics_json(c.means);
    cj["per_utterance"] = nlohmann::ordered_json::array();
    for (const auto& u : c.per_utterance) {
      auto uj = metrics_json(u);
      uj["id"] = u.id;
      cj["per_utterance"].push_back(std::move(uj));
    }
    j["conditions"].push_back(std::move(cj));
  }
  return j.dump(2) + "\n";
}

std::string report_table(const MetricsReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-7s %5s %12s %8s %8s %8s %8s %8s\n", "cutoff_hz", "snr_db", "n",
                "WER(proxy)", "LSD", "LSD-HF", "LSD-in", "SIM", "CER");
  os << line;
  for (const auto& c : r.conditions) {
    const auto& m = c.means;
    std::snprintf(line, sizeof line, "%-10.0f %-7s %5zu %12.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", c.condition.cutoff_hz,
                  snr_text(c.condition.snr_db).c_str(), c.per_utterance.size(), m.wer, m.lsd, m.lsd_highband,
                  m.lsd_input, m.sim, m.content_error_rate);
    os << line;
  }
  return os.str();
}

}  // namespace cogsr::eval
