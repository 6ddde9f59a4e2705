// fam/corpus.cc

// Copyright 2026  The factored-am authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fam/corpus.hh"

#include <fstream>
#include <set>
#include <sstream>

namespace fam {

void GeneratorConfig::validate() const {
  FAM_CHECK(num_phonemes >= 2) << "num_phonemes must be >= 2";
  FAM_CHECK(feature_dim >= 1) << "feature_dim must be >= 1";
  FAM_CHECK(vocab_size >= 1) << "vocab_size must be >= 1";
  FAM_CHECK(word_len_min >= 1 && word_len_max >= word_len_min)
      << "bad word length range";
  FAM_CHECK(coarticulation >= 0.0 && coarticulation <= 1.0)
      << "coarticulation must be in [0,1]";
  FAM_CHECK(emission_noise > 0.0) << "emission_noise must be positive";
  FAM_CHECK(mean_duration >= 1.0) << "mean_duration must be >= 1";
  FAM_CHECK(silence_mean_duration >= 1.0) << "bad silence duration";
  FAM_CHECK(silence_prob >= 0.0 && silence_prob <= 1.0) << "bad silence_prob";
  FAM_CHECK(utt_len_min >= 1 && utt_len_max >= utt_len_min)
      << "bad utterance length range";
}

GeneratorConfig GeneratorConfig::FromConfig(const Config &cfg,
                                            const std::string &s) {
  GeneratorConfig g;
  g.num_phonemes = cfg.get_int(s, "num_phonemes", g.num_phonemes);
  g.feature_dim = cfg.get_int(s, "feature_dim", g.feature_dim);
  g.vocab_size = cfg.get_int(s, "vocab_size", g.vocab_size);
  g.word_len_min = cfg.get_int(s, "word_len_min", g.word_len_min);
  g.word_len_max = cfg.get_int(s, "word_len_max", g.word_len_max);
  g.coarticulation = cfg.get_double(s, "coarticulation", g.coarticulation);
  g.emission_noise = cfg.get_double(s, "emission_noise", g.emission_noise);
  g.base_scale = cfg.get_double(s, "base_scale", g.base_scale);
  g.mean_duration = cfg.get_double(s, "mean_duration", g.mean_duration);
  g.silence_mean_duration =
      cfg.get_double(s, "silence_mean_duration", g.silence_mean_duration);
  g.silence_prob = cfg.get_double(s, "silence_prob", g.silence_prob);
  g.utt_len_min = cfg.get_int(s, "utt_len_min", g.utt_len_min);
  g.utt_len_max = cfg.get_int(s, "utt_len_max", g.utt_len_max);
  g.seed = static_cast<std::uint64_t>(cfg.get_int(s, "seed", 1));
  g.validate();
  return g;
}

void Lexicon::validate(const PhonemeInventory &inv) const {
  FAM_CHECK(names.size() == prons.size()) << "lexicon name/pron size mismatch";
  for (int w = 0; w < num_words(); ++w) {
    FAM_CHECK(!prons[w].empty()) << "empty pronunciation for word " << w;
    for (int ph : prons[w])
      FAM_CHECK(ph >= 0 && ph < inv.num_phonemes())
          << "word " << w << " uses phoneme outside inventory: " << ph;
  }
}

Lexicon Lexicon::Read(const std::string &path, const PhonemeInventory &inv) {
  std::ifstream in(path);
  FAM_CHECK(in.good()) << "cannot open lexicon file " << path;
  Lexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name, sym;
    ss >> name;
    std::vector<int> pron;
    while (ss >> sym) {
      int id = inv.find_symbol(sym);
      FAM_CHECK(id >= 0 && id < inv.num_phonemes())
          << "lexicon word " << name << ": unknown phoneme " << sym;
      pron.push_back(id);
    }
    lex.names.push_back(name);
    lex.prons.push_back(std::move(pron));
  }
  lex.validate(inv);
  return lex;
}

void Lexicon::Write(const std::string &path,
                    const PhonemeInventory &inv) const {
  std::ofstream out(path);
  FAM_CHECK(out.good()) << "cannot write lexicon file " << path;
  for (int w = 0; w < num_words(); ++w) {
    out << names[w];
    for (int ph : prons[w]) out << " " << inv.symbol_name(ph);
    out << "\n";
  }
}

std::vector<int> spell(const Lexicon &lexicon, const std::vector<int> &words) {
  std::vector<int> out;
  for (int w : words) {
    FAM_CHECK(w >= 0 && w < lexicon.num_words()) << "word id out of range";
    out.insert(out.end(), lexicon.prons[w].begin(), lexicon.prons[w].end());
  }
  return out;
}

Lexicon generate_lexicon(const GeneratorConfig &cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 1);
  std::uniform_int_distribution<int> len_dist(cfg.word_len_min,
                                              cfg.word_len_max);
  std::uniform_int_distribution<int> ph_dist(0, cfg.num_phonemes - 1);
  Lexicon lex;
  std::set<std::vector<int>> seen;
  for (int w = 0; w < cfg.vocab_size; ++w) {
    // Resample duplicates so that word identity is recoverable from audio;
    // homophone handling in the decoder is exercised by dedicated tests.
    std::vector<int> pron;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      pron.clear();
      int len = len_dist(rng);
      for (int i = 0; i < len; ++i) pron.push_back(ph_dist(rng));
      if (seen.insert(pron).second) break;
      pron.clear();
    }
    FAM_CHECK(!pron.empty())
        << "could not sample a unique pronunciation for word " << w
        << "; enlarge phoneme set or length range";
    lex.names.push_back("w" + std::to_string(w));
    lex.prons.push_back(std::move(pron));
  }
  return lex;
}

namespace {

// Per-corpus emission tables, fixed by cfg.seed.
struct MeanTables {
  MatF base;         // (3P+1) x D
  MatF delta_left;   // (P+1) x D
  MatF delta_right;  // (P+1) x D
  VecF unigram;      // word weights, sums to 1

  MeanTables(const GeneratorConfig &cfg, const PhonemeInventory &inv) {
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fill = [&](MatF &m, int rows, double scale) {
      m.resize(rows, cfg.feature_dim);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cfg.feature_dim; ++c)
          m(r, c) = static_cast<float>(scale * gauss(rng));
    };
    fill(base, inv.num_center_labels(), cfg.base_scale);
    fill(delta_left, inv.num_symbols(), 1.0);
    fill(delta_right, inv.num_symbols(), 1.0);
    std::uniform_real_distribution<double> uni(0.5, 1.5);
    unigram.resize(cfg.vocab_size);
    for (int w = 0; w < cfg.vocab_size; ++w)
      unigram[w] = static_cast<float>(uni(rng));
    unigram /= unigram.sum();
  }

  VecF mean(const TriphoneContext &ctx, double alpha) const {
    return base.row(ctx.center).transpose() +
           static_cast<float>(alpha) *
               (delta_left.row(ctx.left).transpose() +
                delta_right.row(ctx.right).transpose());
  }
};

int sample_duration(std::mt19937_64 &rng, double mean) {
  // 1 + Geometric(p) with mean 1/p.
  std::geometric_distribution<int> dist(1.0 / mean);
  return 1 + dist(rng);
}

}  // namespace

Corpus generate_corpus(const GeneratorConfig &cfg, const Lexicon &lexicon,
                       int n_utterances, std::uint64_t utterance_seed_offset,
                       const std::string &id_prefix) {
  cfg.validate();
  Corpus corpus;
  corpus.inventory = PhonemeInventory::Synthetic(cfg.num_phonemes);
  corpus.feature_dim = cfg.feature_dim;
  lexicon.validate(corpus.inventory);
  FAM_CHECK(lexicon.num_words() == cfg.vocab_size)
      << "lexicon size does not match generator config";

  const PhonemeInventory &inv = corpus.inventory;
  MeanTables tables(cfg, inv);
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 3 +
                      utterance_seed_offset * 0xbf58476d1ce4e5b9ull);
  std::uniform_int_distribution<int> ulen(cfg.utt_len_min, cfg.utt_len_max);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::discrete_distribution<int> word_dist(tables.unigram.data(),
                                            tables.unigram.data() +
                                                tables.unigram.size());

  for (int u = 0; u < n_utterances; ++u) {
    Utterance utt;
    utt.id = id_prefix + std::to_string(u);
    int n_words = ulen(rng);
    for (int i = 0; i < n_words; ++i) utt.words.push_back(word_dist(rng));

    const int sil = inv.silence_symbol();
    if (coin(rng) < cfg.silence_prob) utt.phoneme_string.push_back(sil);
    for (int i = 0; i < n_words; ++i) {
      const auto &pron = lexicon.prons[utt.words[i]];
      utt.phoneme_string.insert(utt.phoneme_string.end(), pron.begin(),
                                pron.end());
      if (coin(rng) < cfg.silence_prob) utt.phoneme_string.push_back(sil);
    }

    // Durations and emissions, left to right through the spelled string.
    std::vector<VecF> rows;
    for (int pos = 0; pos < static_cast<int>(utt.phoneme_string.size());
         ++pos) {
      bool is_sil = utt.phoneme_string[pos] == sil;
      int n_states = is_sil ? 1 : kStatesPerPhoneme;
      for (int st = 0; st < n_states; ++st) {
        TriphoneContext ctx = map_state_class(inv, utt.phoneme_string, pos, st);
        int dur = sample_duration(
            rng, is_sil ? cfg.silence_mean_duration : cfg.mean_duration);
        VecF mu = tables.mean(ctx, cfg.coarticulation);
        for (int d = 0; d < dur; ++d) {
          VecF x(cfg.feature_dim);
          for (int k = 0; k < cfg.feature_dim; ++k)
            x[k] = mu[k] +
                   static_cast<float>(cfg.emission_noise * gauss(rng));
          rows.push_back(std::move(x));
          utt.alignment.push_back(ctx);
        }
      }
    }
    utt.frames.resize(static_cast<int>(rows.size()), cfg.feature_dim);
    for (int t = 0; t < static_cast<int>(rows.size()); ++t)
      utt.frames.row(t) = rows[t].transpose();
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

// ---- container format ----
//
// Text header, binary frame payload:
//   FAMCORPUS 1
//   <P> <D> <n_utterances>
//   <silence symbol> <phoneme symbols...>
// then per utterance:
//   utt <id> <n_words> <n_phonemes> <T> <n_runs>
//   <word ids...>
//   <phoneme symbol ids...>
//   frames\n  followed by T*D little-endian float32
//   \n<alignment runs: context-index length ...>\n

void write_corpus(const Corpus &corpus, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  FAM_CHECK(out.good()) << "cannot write corpus file " << path;
  const PhonemeInventory &inv = corpus.inventory;
  out << "FAMCORPUS 1\n";
  out << inv.num_phonemes() << " " << corpus.feature_dim << " "
      << corpus.utterances.size() << "\n";
  out << inv.symbol_name(inv.silence_symbol());
  for (int p = 0; p < inv.num_phonemes(); ++p)
    out << " " << inv.symbol_name(p);
  out << "\n";
  for (const Utterance &utt : corpus.utterances) {
    // Run-length encode the alignment.
    std::vector<std::pair<int, int>> runs;
    for (const TriphoneContext &ctx : utt.alignment) {
      int idx = context_index(inv, ctx);
      if (!runs.empty() && runs.back().first == idx)
        ++runs.back().second;
      else
        runs.emplace_back(idx, 1);
    }
    out << "utt " << utt.id << " " << utt.words.size() << " "
        << utt.phoneme_string.size() << " " << utt.num_frames() << " "
        << runs.size() << "\n";
    for (size_t i = 0; i < utt.words.size(); ++i)
      out << (i ? " " : "") << utt.words[i];
    out << "\n";
    for (size_t i = 0; i < utt.phoneme_string.size(); ++i)
      out << (i ? " " : "") << utt.phoneme_string[i];
    out << "\n";
    out << "frames\n";
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char *>(utt.frames.data()),
              static_cast<std::streamsize>(sizeof(float)) * utt.frames.size());
    out << "\n";
    for (size_t i = 0; i < runs.size(); ++i)
      out << (i ? " " : "") << runs[i].first << " " << runs[i].second;
    out << "\n";
  }
  FAM_CHECK(out.good()) << "write failure on corpus file " << path;
}

Corpus read_corpus(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  FAM_CHECK(in.good()) << "cannot open corpus file " << path;
  std::string magic;
  int version = 0;
  in >> magic >> version;
  FAM_CHECK(magic == "FAMCORPUS" && version == 1)
      << path << ": malformed header";
  int P = 0, D = 0;
  size_t n_utts = 0;
  in >> P >> D >> n_utts;
  FAM_CHECK(in.good() && P >= 2 && D >= 1) << path << ": malformed header";
  std::string silence;
  in >> silence;
  std::vector<std::string> phonemes(P);
  for (auto &p : phonemes) in >> p;
  Corpus corpus;
  corpus.inventory = PhonemeInventory(std::move(phonemes), silence);
  corpus.feature_dim = D;
  const PhonemeInventory &inv = corpus.inventory;
  for (size_t u = 0; u < n_utts; ++u) {
    std::string tag;
    Utterance utt;
    size_t n_words = 0, n_ph = 0, n_runs = 0;
    int T = 0;
    in >> tag >> utt.id >> n_words >> n_ph >> T >> n_runs;
    FAM_CHECK(in.good() && tag == "utt")
        << path << ": malformed utterance header at index " << u;
    utt.words.resize(n_words);
    for (auto &w : utt.words) in >> w;
    utt.phoneme_string.resize(n_ph);
    for (auto &p : utt.phoneme_string) {
      in >> p;
      FAM_CHECK(p >= 0 && p <= inv.num_phonemes())
          << path << ": utterance " << utt.id << ": bad phoneme id " << p;
    }
    in >> tag;
    FAM_CHECK(in.good() && tag == "frames")
        << path << ": utterance " << utt.id << ": missing frames";
    in.get();  // newline before the binary payload
    utt.frames.resize(T, D);
    in.read(reinterpret_cast<char *>(utt.frames.data()),
            static_cast<std::streamsize>(sizeof(float)) * utt.frames.size());
    FAM_CHECK(in.gcount() ==
              static_cast<std::streamsize>(sizeof(float)) * utt.frames.size())
        << path << ": utterance " << utt.id << ": truncated frames";
    for (size_t r = 0; r < n_runs; ++r) {
      int idx = 0, len = 0;
      in >> idx >> len;
      FAM_CHECK(in.good() && len > 0)
          << path << ": utterance " << utt.id << ": malformed alignment";
      TriphoneContext ctx = context_from_index(inv, idx);
      for (int i = 0; i < len; ++i) utt.alignment.push_back(ctx);
    }
    FAM_CHECK(static_cast<int>(utt.alignment.size()) == T)
        << path << ": utterance " << utt.id
        << ": alignment length does not match frame count (dimension "
           "mismatch)";
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace fam
