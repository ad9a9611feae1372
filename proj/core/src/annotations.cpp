#include "firstreply/annotations.hpp"

#include <fstream>
#include <numeric>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"

namespace firstreply {

AnnotationSheet load_annotation_sheet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotation sheet: " + path);
  AnnotationSheet sheet;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      throw DataError("annotation sheet row needs a word and >=2 ratings: " + line);
    }
    sheet.words.push_back(fields[0]);
    std::vector<int> row;
    for (size_t i = 1; i < fields.size(); ++i) {
      auto v = parse_int(fields[i]);
      if (!v || *v < 0 || *v > 2) {
        throw DataError("annotation rating must be 0, 1 or 2: " + fields[i]);
      }
      row.push_back(static_cast<int>(*v));
    }
    sheet.ratings.push_back(std::move(row));
  }
  return sheet;
}

AnnotationAggregate aggregate_annotations(const AnnotationSheet& sheet) {
  if (sheet.words.size() != sheet.ratings.size()) {
    throw DataError("annotation sheet: words/ratings size mismatch");
  }
  if (sheet.words.empty()) throw DataError("annotation sheet is empty");
  const size_t raters = sheet.ratings.front().size();
  if (raters < 2) throw DataError("annotation sheet needs at least 2 annotators");
  for (const auto& row : sheet.ratings) {
    if (row.size() != raters) throw DataError("ragged annotation ratings");
  }

  AnnotationAggregate out;
  const size_t n_items = sheet.words.size();
  const double n = static_cast<double>(raters);

  double p_bar = 0.0;
  double category_mass[3] = {0.0, 0.0, 0.0};
  for (size_t i = 0; i < n_items; ++i) {
    int tally[3] = {0, 0, 0};
    int total = 0;
    for (int r : sheet.ratings[i]) {
      tally[r] += 1;
      total += r;
    }
    if (total >= 4) out.hate_words.insert(sheet.words[i]);
    double agree = 0.0;
    for (int j = 0; j < 3; ++j) {
      agree += static_cast<double>(tally[j]) * tally[j];
      category_mass[j] += tally[j];
    }
    p_bar += (agree - n) / (n * (n - 1.0));
  }
  p_bar /= static_cast<double>(n_items);

  double p_e = 0.0;
  for (int j = 0; j < 3; ++j) {
    double pj = category_mass[j] / (static_cast<double>(n_items) * n);
    p_e += pj * pj;
  }
  if (1.0 - p_e < 1e-15) {
    // every rating in a single category: perfect agreement by construction
    out.fleiss_kappa = 1.0;
  } else {
    out.fleiss_kappa = (p_bar - p_e) / (1.0 - p_e);
  }
  return out;
}

bool classify_community(int hate_word_count) {
  if (hate_word_count < 0) throw DataError("classify_community: negative count");
  return hate_word_count > 5;
}

}  // namespace firstreply
