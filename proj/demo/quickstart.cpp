// Minimal end-to-end use of the library: generate a synthetic corpus,
// train on character (1+2+3)-grams with TF-IDF, and score held-out data.

#include <cstdio>
#include <iostream>

#include "cmstress/features.hpp"
#include "cmstress/forest.hpp"
#include "cmstress/metrics.hpp"
#include "cmstress/synth.hpp"

using namespace cmstress;

int main() {
  SynthSpec spec;
  spec.n_per_label = {300, 150};
  spec.marker_tokens[0] = {"velaiyillai", "sandosham", "nallairukku"};
  spec.marker_tokens[1] = {"kavalaippadu", "thookamillai", "azhuthachu"};
  spec.shared_vocab = {"bro",   "video", "clip",  "super", "comment", "pettav",
                       "chala", "innum", "mattum", "oru",   "time",    "day"};
  spec.doc_len_min = 4;
  spec.doc_len_max = 10;
  spec.noise_rate = 0.05;

  spec.seed = 1;
  LabeledCorpus train = generate_synthetic(spec);
  spec.seed = 2;
  spec.n_per_label = {80, 40};
  LabeledCorpus held_out = generate_synthetic(spec);

  const AnalyzerConfig analyzer{AnalyzerKind::kChar, 1, 3, true};
  const Vocabulary vocab = fit_vocabulary(train, analyzer);
  const auto x_train = transform_corpus(train, vocab, WeightingScheme::kTfIdf);

  ForestParams params;
  params.seed = 42;
  const Forest forest = train_forest(x_train, corpus_labels(train), params);

  std::vector<Label> predicted;
  for (const auto& doc : held_out.docs) {
    predicted.push_back(
        predict_forest(forest, vectorize(doc.text, vocab, WeightingScheme::kTfIdf)).label);
  }
  const MetricsReport report =
      compute_metrics(confusion(corpus_labels(held_out), predicted));

  std::printf("%zu train docs, vocabulary %u char n-grams, %u trees\n", train.size(),
              vocab.dim(), params.n_trees);
  std::cout << render_metrics(report, RenderStyle::kTable3);
  return 0;
}
