#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace mimic {
namespace {

// Independent oracles --------------------------------------------------------

std::vector<std::optional<double>> sma_oracle(const std::vector<double>& p, std::size_t w) {
  std::vector<std::optional<double>> out(p.size());
  for (std::size_t t = w - 1; t < p.size(); ++t) {
    long double s = 0;
    for (std::size_t k = t + 1 - w; k <= t; ++k) s += p[k];
    out[t] = double(s / w);
  }
  return out;
}

// Step-by-step Wilder recurrence written against the textbook form
// avg_t = avg_{t-1} + (x_t - avg_{t-1}) / n.
std::vector<std::optional<double>> rsi_oracle(const std::vector<double>& p, std::size_t n = 14) {
  std::vector<double> gains, losses;
  for (std::size_t t = 1; t < p.size(); ++t) {
    const double d = p[t] - p[t - 1];
    gains.push_back(std::max(d, 0.0));
    losses.push_back(std::max(-d, 0.0));
  }
  std::vector<std::optional<double>> out(p.size());
  double g = 0, l = 0;
  for (std::size_t k = 0; k < n; ++k) {
    g += gains[k];
    l += losses[k];
  }
  g /= double(n);
  l /= double(n);
  auto rsi_of = [](double g, double l) {
    if (g == 0 && l == 0) return 50.0;
    if (l == 0) return 100.0;
    return 100.0 * g / (g + l);
  };
  out[n] = rsi_of(g, l);
  for (std::size_t k = n; k < gains.size(); ++k) {
    g += (gains[k] - g) / double(n);
    l += (losses[k] - l) / double(n);
    out[k + 1] = rsi_of(g, l);
  }
  return out;
}

// Indicators -----------------------------------------------------------------

TEST(Sma, TwoPointMeans) {
  const std::vector<double> p{1, 2, 3, 4};
  const auto s = sma(p, 2);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_FALSE(s[0].has_value());
  EXPECT_DOUBLE_EQ(*s[1], 1.5);
  EXPECT_DOUBLE_EQ(*s[2], 2.5);
  EXPECT_DOUBLE_EQ(*s[3], 3.5);
}

TEST(Sma, ConstantSeries) {
  const std::vector<double> p(60, 42.25);
  for (std::size_t w : {1u, 5u, 20u, 50u}) {
    const auto s = sma(p, w);
    for (std::size_t t = w - 1; t < p.size(); ++t) EXPECT_DOUBLE_EQ(*s[t], 42.25);
  }
}

TEST(Sma, MatchesRollingMeanOracle) {
  std::mt19937_64 gen(11);
  const auto p = testing::random_walk(gen, 1000);
  const auto s = sma(p, 20);
  const auto o = sma_oracle(p, 20);
  for (std::size_t t = 0; t < p.size(); ++t) {
    ASSERT_EQ(s[t].has_value(), o[t].has_value());
    if (s[t]) {
      EXPECT_NEAR(*s[t], *o[t], 1e-12 * std::abs(*o[t]));
    }
  }
}

TEST(Sma, TranslationEquivariant) {
  std::mt19937_64 gen(3);
  const auto p = testing::random_walk(gen, 300);
  std::vector<double> shifted;
  for (double x : p) shifted.push_back(x + 37.5);
  const auto a = sma(p, 50);
  const auto b = sma(shifted, 50);
  for (std::size_t t = 49; t < p.size(); ++t) EXPECT_NEAR(*b[t], *a[t] + 37.5, 1e-9);
}

TEST(Sma, RejectsShortSeriesAndZeroWindow) {
  const std::vector<double> p{1, 2, 3};
  EXPECT_THROW(sma(p, 4), InvalidArgument);
  EXPECT_THROW(sma(p, 0), InvalidArgument);
}

TEST(Rsi, IncreasingSeriesIs100) {
  std::vector<double> p;
  for (int i = 0; i < 40; ++i) p.push_back(10.0 + i * 0.5);
  const auto r = rsi14(p);
  for (std::size_t t = 0; t < 14; ++t) EXPECT_FALSE(r[t].has_value());
  for (std::size_t t = 14; t < p.size(); ++t) EXPECT_DOUBLE_EQ(*r[t], 100.0);
}

TEST(Rsi, ConstantSeriesIs50) {
  const std::vector<double> p(30, 7.0);
  const auto r = rsi14(p);
  for (std::size_t t = 14; t < p.size(); ++t) EXPECT_DOUBLE_EQ(*r[t], 50.0);
}

TEST(Rsi, MatchesWilderOracleOnRandomSeries) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = testing::random_walk(gen, 400);
    const auto r = rsi14(p);
    const auto o = rsi_oracle(p);
    for (std::size_t t = 0; t < p.size(); ++t) {
      ASSERT_EQ(r[t].has_value(), o[t].has_value());
      if (r[t]) {
        EXPECT_NEAR(*r[t], *o[t], 1e-9);
        EXPECT_GE(*r[t], 0.0);
        EXPECT_LE(*r[t], 100.0);
      }
    }
  }
}

TEST(Rsi, InvariantUnderPositiveScaling) {
  std::mt19937_64 gen(9);
  const auto p = testing::random_walk(gen, 200);
  std::vector<double> scaled;
  for (double x : p) scaled.push_back(3.0 * x);
  const auto a = rsi14(p);
  const auto b = rsi14(scaled);
  for (std::size_t t = 14; t < p.size(); ++t) EXPECT_NEAR(*a[t], *b[t], 1e-9);
}

TEST(Rsi, RejectsShortSeries) {
  const std::vector<double> p(14, 1.0);
  EXPECT_THROW(rsi14(p), InvalidArgument);
}

// Numeric assembly -----------------------------------------------------------

struct AssemblyFixture {
  Company company;
  MarketContext market;
  EarningsInstance inst;

  explicit AssemblyFixture(std::size_t history_days) {
    company.company_id = "ACME";
    const Date call(2024, 3, 1);
    Date d = call.plus_days(-long(history_days) + 1);
    for (std::size_t i = 0; i < history_days + 10; ++i, d = d.plus_days(1)) {
      company.prices.push_back({d, 100.0 + double(i), 100.0 + double(i) + 0.5, 1000.0});
      market.nifty.push_back({d, 20000.0 + double(i), 20005.0 + double(i), 5e8});
    }
    company.fundamentals = {{2022, Date(2022, 3, 31), {{"sales", 1.0}, {"net_profit", 0.1}}},
                            {2023, Date(2023, 3, 31), {{"sales", 2.0}, {"net_profit", 0.2}}},
                            {2024, Date(2024, 3, 31), {{"sales", 3.0}, {"net_profit", 0.3}}}};
    market.gdp_growth = {{Date(2023, 11, 30), 7.6}, {Date(2024, 3, 1), 8.4}};
    market.inflation_rate = {{Date(2024, 2, 12), 5.1}};
    inst.company_id = "ACME";
    inst.call_date = call;
    inst.open_d = company.prices[history_days - 1].open;
    inst.open_d1 = company.prices[history_days].open;
  }
};

TEST(AssembleNumeric, UsesMostRecentFiscalYearBeforeCall) {
  AssemblyFixture f(60);
  const auto v = assemble_numeric(f.inst, f.company, f.market);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::sales], 2.0);       // FY2023, not FY2024 (ends after the call)
  EXPECT_DOUBLE_EQ(*v[NumericColumn::net_profit], 0.2);
  EXPECT_FALSE(v[NumericColumn::eps].has_value());        // not reported -> missing, not zero
}

TEST(AssembleNumeric, Sma50WindowBoundary) {
  AssemblyFixture exactly50(50);
  EXPECT_TRUE(assemble_numeric(exactly50.inst, exactly50.company, exactly50.market)[NumericColumn::sma50].has_value());
  AssemblyFixture only49(49);
  const auto v = assemble_numeric(only49.inst, only49.company, only49.market);
  EXPECT_FALSE(v[NumericColumn::sma50].has_value());
  EXPECT_TRUE(v[NumericColumn::sma20].has_value());
}

TEST(AssembleNumeric, MatchesHandAssembledVector) {
  AssemblyFixture f(60);
  const auto v = assemble_numeric(f.inst, f.company, f.market);
  // closes through the call day are 100.5 + i for i = 0..59
  EXPECT_DOUBLE_EQ(*v[NumericColumn::sma20], 100.5 + (40 + 59) / 2.0);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::sma50], 100.5 + (10 + 59) / 2.0);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::rsi14], 100.0);           // strictly rising closes
  EXPECT_DOUBLE_EQ(*v[NumericColumn::nifty_open], 20000.0 + 59);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::nifty_close], 20005.0 + 59);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::nifty_volume], 5e8);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::gdp_growth], 7.6);        // 2024-03-01 release is not strictly before
  EXPECT_DOUBLE_EQ(*v[NumericColumn::inflation_rate], 5.1);
  EXPECT_DOUBLE_EQ(*v[NumericColumn::open_d], f.inst.open_d);
  EXPECT_EQ(v.missing_count(), kNumericWidth - 2 /*macro*/ - 3 /*market*/ - 3 /*technical*/ - 2 /*fundamentals*/ - 1);
}

TEST(AssembleNumeric, MissingIndexBarIsAnError) {
  AssemblyFixture f(60);
  f.market.nifty.erase(f.market.nifty.begin() + 59);
  EXPECT_THROW(assemble_numeric(f.inst, f.company, f.market), DataError);
}

TEST(AssembleNumeric, NeverReadsPastCallDate) {
  AssemblyFixture f(60);
  const auto clean = assemble_numeric(f.inst, f.company, f.market);
  // Poison everything after the call day; any read would change the output.
  for (auto& b : f.company.prices)
    if (b.date > f.inst.call_date) b.open = b.close = b.volume = std::numeric_limits<double>::quiet_NaN();
  for (auto& b : f.market.nifty)
    if (b.date > f.inst.call_date) b.open = b.close = b.volume = std::numeric_limits<double>::quiet_NaN();
  for (auto& m : f.market.gdp_growth)
    if (m.date >= f.inst.call_date) m.value = std::numeric_limits<double>::quiet_NaN();
  for (auto& r : f.company.fundamentals)
    if (r.period_end >= f.inst.call_date)
      for (auto& [k, v] : r.values) v = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(assemble_numeric(f.inst, f.company, f.market), clean);
}

// Embeddings -----------------------------------------------------------------

Embedding random_embedding(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> n;
  Embedding e;
  for (std::size_t i = 0; i < dim; ++i) e.values.push_back(n(gen));
  return e;
}

TEST(Truncate, UnitPrefixIsUnchanged) {
  std::mt19937_64 gen(1);
  Embedding e = random_embedding(gen, 256);
  for (std::size_t i = 128; i < 256; ++i) e.values[i] = 0.0;
  const double norm = l2_norm(e.values);
  for (auto& x : e.values) x /= norm;
  const auto t = truncate_matryoshka(e, 128);
  ASSERT_EQ(t.dim(), 128u);
  EXPECT_EQ(t.truncated_from, 256u);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(t.values[i], e.values[i], 1e-15);
  EXPECT_NEAR(l2_norm(t.values), 1.0, 1e-12);
}

TEST(Truncate, DegeneratePrefixIsRejected) {
  Embedding e{std::vector<double>(256, 0.0), Modality::text, {}};
  e.values[200] = 1.0;
  EXPECT_THROW(truncate_matryoshka(e, 128), DataError);
}

TEST(Truncate, MatchesComponentwiseOracle) {
  std::mt19937_64 gen(2);
  const auto e = random_embedding(gen, 768);
  const auto t = truncate_matryoshka(e);
  double ss = 0;
  for (std::size_t i = 0; i < 128; ++i) ss += e.values[i] * e.values[i];
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(t.values[i], e.values[i] / std::sqrt(ss), 1e-15);
}

TEST(Truncate, OutputHasUnitNorm) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t dim = 2 + gen() % 1000;
    const std::size_t k = 1 + gen() % dim;
    EXPECT_NEAR(l2_norm(truncate_matryoshka(random_embedding(gen, dim), k).values), 1.0, 1e-9);
  }
}

TEST(Truncate, RejectsOversizedK) {
  std::mt19937_64 gen(4);
  EXPECT_THROW(truncate_matryoshka(random_embedding(gen, 64), 128), InvalidArgument);
}

TEST(MeanPool, SingleEmbeddingIsItself) {
  std::mt19937_64 gen(6);
  const std::vector<Embedding> one{random_embedding(gen, 32)};
  EXPECT_EQ(mean_pool(one).values, one[0].values);
  EXPECT_EQ(mean_pool(one).modality, Modality::pooled);
}

TEST(MeanPool, OppositeVectorsCancel) {
  std::mt19937_64 gen(6);
  const auto v = random_embedding(gen, 32);
  Embedding neg = v;
  for (auto& x : neg.values) x = -x;
  const std::vector<Embedding> pair{v, neg};
  for (double x : mean_pool(pair).values) EXPECT_EQ(x, 0.0);
}

TEST(MeanPool, MatchesComponentwiseMean) {
  std::mt19937_64 gen(8);
  const std::vector<Embedding> three{random_embedding(gen, 128), random_embedding(gen, 128), random_embedding(gen, 128)};
  const auto m = mean_pool(three);
  for (std::size_t i = 0; i < 128; ++i)
    EXPECT_NEAR(m.values[i], (three[0].values[i] + three[1].values[i] + three[2].values[i]) / 3.0, 1e-12);
}

TEST(MeanPool, Errors) {
  std::mt19937_64 gen(8);
  EXPECT_THROW(mean_pool(std::vector<Embedding>{}), InvalidArgument);
  const std::vector<Embedding> mixed{random_embedding(gen, 4), random_embedding(gen, 5)};
  EXPECT_THROW(mean_pool(mixed), DataError);
}

TEST(MeanPool, PoolingCopiesThenTruncatingEqualsTruncating) {
  std::mt19937_64 gen(10);
  const auto v = random_embedding(gen, 768);
  const std::vector<Embedding> copies(5, v);
  const auto a = truncate_matryoshka(mean_pool(copies));
  const auto b = truncate_matryoshka(v);
  for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-15);
}

TEST(MissingModality, ZeroVectorWithFlag) {
  const auto s = encode_missing_modality(128);
  EXPECT_TRUE(s.missing);
  ASSERT_EQ(s.embedding.dim(), 128u);
  for (double x : s.embedding.values) EXPECT_EQ(x, 0.0);
  std::vector<double> row;
  s.append_to(row);
  ASSERT_EQ(row.size(), 129u);
  EXPECT_EQ(row.back(), 1.0);
  EXPECT_THROW(encode_missing_modality(0), InvalidArgument);
}

// Embedding file format ------------------------------------------------------

TEST(EmbeddingFile, ByteLayout) {
  const EmbeddingFile f{Modality::image, 2, {{1.0f, -2.0f}}};
  const std::string bytes = encode_embedding_file(f);
  ASSERT_EQ(bytes.size(), 8u + 4 + 4 + 1 + 8);
  EXPECT_EQ(bytes.substr(0, 8), std::string("MIMEMB1\0", 8));
  EXPECT_EQ(bytes.substr(8, 4), std::string("\x01\0\0\0", 4));   // count
  EXPECT_EQ(bytes.substr(12, 4), std::string("\x02\0\0\0", 4));  // dim
  EXPECT_EQ(bytes[16], '\x01');                                   // modality
  EXPECT_EQ(bytes.substr(17, 4), std::string("\0\0\x80\x3f", 4)); // 1.0f little-endian
}

TEST(EmbeddingFile, RoundTripIsExact) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  testing::TempDir tmp;
  for (int rep = 0; rep < 10; ++rep) {
    EmbeddingFile f{rep % 2 ? Modality::image : Modality::text, std::uint32_t(1 + gen() % 300), {}};
    for (std::size_t r = 0; r < 1 + gen() % 12; ++r) {
      std::vector<float> row(f.dim);
      for (auto& x : row) x = u(gen);
      f.rows.push_back(row);
    }
    write_embedding_file(tmp / "e.emb", f);
    EXPECT_EQ(read_embedding_file(tmp / "e.emb"), f);
  }
}

TEST(EmbeddingFile, BadMagicNamesTheFile) {
  testing::TempDir tmp;
  write_file(tmp / "broken.emb", std::string("NOTANEMB\x01\0\0\0\x01\0\0\0\0\0\0\0\0", 21));
  try {
    read_embedding_file(tmp / "broken.emb");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.emb"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(EmbeddingFile, RejectsTruncatedPayloadAndNonFinite) {
  std::string bytes = encode_embedding_file(EmbeddingFile{Modality::text, 3, {{1, 2, 3}}});
  EXPECT_THROW(decode_embedding_file(bytes.substr(0, bytes.size() - 1), "x"), DataError);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 17, &nan, 4);
  EXPECT_THROW(decode_embedding_file(bytes, "x"), DataError);
  EXPECT_THROW(encode_embedding_file(EmbeddingFile{Modality::text, 1, {{nan}}}), InvalidArgument);
}

}  // namespace
}  // namespace mimic
