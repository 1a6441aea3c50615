#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mimic/core/random.hpp"
#include "mimic/dataset/manifest.hpp"
#include "mimic/features/embedding_io.hpp"

namespace mimic {

/// Parameters of the synthetic earnings dataset. Each instance gets a true
/// direction; its text and image embeddings carry that direction in the sign
/// of their first component with probability `signal_agreement`, drawn
/// independently per modality. Numeric features are a plain random walk.
struct SynthOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double signal_agreement = 0.8;
  std::uint32_t text_dim = 768;
  std::uint32_t image_dim = 768;
  std::size_t min_slides = 1;
  std::size_t max_slides = 6;
  double missing_text_rate = 0.1;
  double missing_image_rate = 0.1;
  double min_return = 0.02;  ///< |open_d1 / open_d - 1| bounds
  double max_return = 0.06;
};

struct SynthSummary {
  std::size_t instances = 0;
  std::size_t companies = 0;
  double positive_rate = 0.0;
  double text_agreement = 0.0;   ///< fraction of text embeddings whose sign matches the label
  double image_agreement = 0.0;
  std::size_t train = 0, val = 0, test = 0;
};

namespace detail {

inline std::vector<Date> business_days(Date from, Date to) {
  std::vector<Date> out;
  for (Date d = from; d <= to; d = d.plus_days(1))
    if (const auto wd = d.weekday(); wd != 0 && wd != 6) out.push_back(d);
  return out;
}

inline std::vector<float> signal_vector(Rng& rng, std::uint32_t dim, int sign) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  v[0] = double(sign) * (std::abs(v[0]) + 2.0);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = float(v[i] / norm);
  return out;
}

}  // namespace detail

/// Writes a complete synthetic dataset (manifest.json, price CSVs,
/// transcripts, embedding files) under `dir`.
inline SynthSummary generate_synthetic(const std::filesystem::path& dir, const SynthOptions& opt) {
  namespace fs = std::filesystem;
  if (opt.n < 10) throw InvalidArgument("synth: need at least 10 instances");
  if (opt.text_dim == 0 || opt.image_dim == 0) throw InvalidArgument("synth: embedding dims must be positive");
  if (opt.min_slides == 0 || opt.max_slides < opt.min_slides) throw InvalidArgument("synth: bad slide count range");
  if (opt.missing_text_rate + opt.missing_image_rate >= 1.0) throw InvalidArgument("synth: missing rates too large");
  Rng rng(opt.seed);

  const auto calendar = detail::business_days(Date(2018, 6, 1), Date(2024, 12, 31));
  const SplitSpec split;
  const std::size_t n_companies = std::max<std::size_t>(3, opt.n / 8);
  const std::size_t n_train = opt.n * 8 / 10, n_val = opt.n / 10;

  auto day_in = [&](Date lo, Date hi) -> std::size_t {
    const auto a = std::lower_bound(calendar.begin(), calendar.end(), lo) - calendar.begin();
    const auto b = std::upper_bound(calendar.begin(), calendar.end(), hi) - calendar.begin();
    return std::size_t(a) + rng.below(std::size_t(b - a));
  };

  struct Call {
    std::size_t company, day;
    int direction;
    double ret;
  };
  std::vector<Call> calls;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t i = 0; i < opt.n; ++i) {
    Date lo(2019, 1, 1), hi = split.train_end;
    if (i >= n_train + n_val) {
      lo = split.val_end.plus_days(1);
      hi = Date(2024, 11, 29);
    } else if (i >= n_train) {
      lo = split.train_end.plus_days(1);
      hi = split.val_end;
    }
    const std::size_t company = i % n_companies;
    std::size_t day;
    do {
      day = day_in(lo, hi);
    } while (!used.insert({company, day}).second);
    const int dir = rng.bernoulli(0.5) ? 1 : -1;
    calls.push_back({company, day, dir, dir * rng.uniform(opt.min_return, opt.max_return)});
  }

  DatasetManifest m;
  m.version = "synthetic-1 seed=" + std::to_string(opt.seed) + " n=" + std::to_string(opt.n);
  m.root = dir;

  {
    double level = 17000.0;
    for (const auto& d : calendar) {
      const double open = level * std::exp(rng.normal(0.0, 0.004));
      const double close = open * std::exp(rng.normal(0.0, 0.008));
      m.market.nifty.push_back({d, open, close, std::round(rng.uniform(2e8, 6e8))});
      level = close;
    }
    for (Date q(2018, 3, 31); q < Date(2025, 1, 1); q = q.plus_days(91))
      m.market.gdp_growth.push_back({q.plus_days(60), rng.uniform(4.0, 8.5)});
    for (Date mo(2018, 6, 12); mo < Date(2025, 1, 1); mo = mo.plus_days(30))
      m.market.inflation_rate.push_back({mo, rng.uniform(3.5, 7.5)});
  }

  std::vector<std::map<std::size_t, double>> jumps(n_companies);  // day index of d -> return into d+1
  for (const auto& c : calls) jumps[c.company][c.day] = c.ret;

  for (std::size_t k = 0; k < n_companies; ++k) {
    char id[24];
    std::snprintf(id, sizeof id, "SYN%03zu", k + 1);
    Company c;
    c.company_id = id;
    c.name = std::string("Synthetic Company ") + id;
    c.prices_file = std::string("prices/") + id + ".csv";
    double level = std::exp(rng.uniform(std::log(200.0), std::log(2000.0)));
    const bool financial = rng.bernoulli(0.25);
    for (std::size_t t = 0; t < calendar.size(); ++t) {
      double open = level * std::exp(rng.normal(0.0, 0.005));
      if (t > 0) {
        if (const auto it = jumps[k].find(t - 1); it != jumps[k].end()) open = c.prices[t - 1].open * (1.0 + it->second);
      }
      const double close = open * std::exp(rng.normal(0.0, 0.01));
      c.prices.push_back({calendar[t], open, close, std::round(rng.uniform(1e5, 1e6))});
      level = close;
    }
    const double scale = rng.uniform(500.0, 50000.0);
    for (int fy = 2018; fy <= 2024; ++fy) {
      FundamentalsRecord r;
      r.fiscal_year = fy;
      r.period_end = Date(fy, 3, 31);
      const double g = std::pow(1.08, fy - 2018) * rng.uniform(0.9, 1.1);
      for (std::size_t col = kFirstFundamental; col <= kLastFundamental; ++col) {
        const auto name = std::string(kNumericColumnNames[col]);
        const bool bank_only = name == "deposits" || name == "financing_profit" || name == "financing_margin";
        if (bank_only && !financial) continue;
        double v = scale * g * rng.uniform(0.05, 1.0);
        if (name == "tax_rate" || name == "dividend_payout" || name == "financing_margin") v = rng.uniform(0.0, 40.0);
        if (name == "eps") v = rng.uniform(1.0, 120.0);
        if (name.rfind("cash_from_investing", 0) == 0 || name.rfind("cash_from_financing", 0) == 0) v = -v;
        r.values[name] = v;
      }
      c.fundamentals.push_back(std::move(r));
    }
    m.companies.push_back(std::move(c));
  }

  SynthSummary sum;
  std::size_t pos = 0, text_n = 0, text_agree = 0, image_n = 0, image_agree = 0;
  for (const auto& call : calls) {
    const auto& company = m.companies[call.company];
    EarningsInstance inst;
    inst.company_id = company.company_id;
    inst.call_date = calendar[call.day];
    inst.open_d = company.prices[call.day].open;
    inst.open_d1 = company.prices[call.day + 1].open;
    const int label = direction_label(inst.open_d, inst.open_d1);
    pos += std::size_t(label);
    const std::string stem = inst.company_id + "_" + inst.call_date.iso();

    const double u = rng.uniform();
    const bool has_text = u >= opt.missing_text_rate;
    const bool has_images = u < opt.missing_text_rate || u >= opt.missing_text_rate + opt.missing_image_rate;
    const int truth = label ? 1 : -1;
    if (has_text) {
      inst.transcript_file = "transcripts/" + stem + ".txt";
      write_file(dir / *inst.transcript_file, "Earnings call transcript for " + company.name + " on " +
                                                   inst.call_date.iso() + ".\nManagement discussed quarterly results.\n");
      if (rng.bernoulli(0.5)) {
        inst.table_markdown_file = "tables/" + stem + ".md";
        write_file(dir / *inst.table_markdown_file, "| Metric | Value |\n|---|---|\n| Revenue | " +
                                                        std::to_string(int(rng.uniform(100, 9000))) + " |\n");
      }
      const int sign = rng.bernoulli(opt.signal_agreement) ? truth : -truth;
      ++text_n;
      text_agree += sign == truth;
      inst.text_embedding_ref = "embeddings/text/" + stem + ".emb";
      write_embedding_file(dir / *inst.text_embedding_ref,
                           EmbeddingFile{Modality::text, opt.text_dim, {detail::signal_vector(rng, opt.text_dim, sign)}});
    }
    if (has_images) {
      const int sign = rng.bernoulli(opt.signal_agreement) ? truth : -truth;
      ++image_n;
      image_agree += sign == truth;
      const std::size_t slides = opt.min_slides + rng.below(opt.max_slides - opt.min_slides + 1);
      EmbeddingFile f{Modality::image, opt.image_dim, {}};
      for (std::size_t s = 0; s < slides; ++s) f.rows.push_back(detail::signal_vector(rng, opt.image_dim, sign));
      inst.image_embedding_refs.push_back("embeddings/image/" + stem + ".emb");
      write_embedding_file(dir / inst.image_embedding_refs.back(), f);
    }
    m.instances.push_back(std::move(inst));
  }

  for (const auto& c : m.companies) write_file(dir / *c.prices_file, detail::format_price_csv(c.prices));

  // numeric features are left for load_manifest to assemble
  nlohmann::json doc = manifest_to_json(m);
  for (auto& inst : doc["instances"]) inst.erase("numeric");
  for (auto& c : doc["companies"]) c.erase("prices");
  write_file_atomic(dir / "manifest.json", doc.dump(1) + "\n");

  sum.instances = opt.n;
  sum.companies = n_companies;
  sum.positive_rate = double(pos) / double(opt.n);
  sum.text_agreement = text_n ? double(text_agree) / double(text_n) : 0.0;
  sum.image_agreement = image_n ? double(image_agree) / double(image_n) : 0.0;
  const auto parts = temporal_split(m.instances, split);
  sum.train = parts.train.size();
  sum.val = parts.val.size();
  sum.test = parts.test.size();
  return sum;
}

}  // namespace mimic
