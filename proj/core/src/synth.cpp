// Copyright 2026 The deid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <string_view>

#include "deid/errors.hpp"
#include "deid/rng.hpp"
#include "deid/utf8.hpp"
#include "deid/wordlists.hpp"

namespace deid {

namespace {

using namespace std::string_view_literals;

// Templates are led by one category; placeholders in braces. PII slots:
// FULLNAME LASTNAME FIRSTNAME ADDRESS DOB MRN FIN PAGER PHONE. {DR} is the
// doctor cue and may be misspelled.
struct Template {
  PiiCategory lead;
  std::string_view text;
};

constexpr Template kTemplates[] = {
    {PiiCategory::kPerson, "Patient: {FULLNAME} MRN: {MRN}"},
    {PiiCategory::kPerson, "Patient: {FULLNAME} MRN: {MRN} FIN {FIN}"},
    {PiiCategory::kPerson,
     "Thank you for the care of {FULLNAME}, a {AGE}-year-old {SEXWORD} from home."},
    {PiiCategory::kPerson, "Known to {DR}{LASTNAME}'s Room for follow up."},
    {PiiCategory::kPerson, "Reviewed by {DR}{FULLNAME} ({SPECIALTY})."},
    {PiiCategory::kPerson, "Discussed with {DR}{LASTNAME} who agreed with the plan."},
    {PiiCategory::kPerson, "Next of kin: {FULLNAME} ({RELATION})"},
    {PiiCategory::kPerson, "Consultant: {DR}{FULLNAME}"},
    {PiiCategory::kPerson, "Author: {DR}{FULLNAME}, {ROLE}"},
    {PiiCategory::kPerson,
     "{FIRSTNAME} was reviewed by the physiotherapy team and mobilised well."},
    {PiiCategory::kPerson, "{TITLE} {LASTNAME} was admitted with {CONDITION}."},
    {PiiCategory::kPerson, "Seen on the ward round by Prof {LASTNAME}."},
    {PiiCategory::kPerson, "Handed over to {LASTNAME} overnight."},
    {PiiCategory::kPerson, "Care handed over to {FIRSTNAME} on the evening shift."},
    {PiiCategory::kPerson, "GP: {DR}{FULLNAME}"},
    {PiiCategory::kPerson, "Family meeting held with {FULLNAME} and the {SPECIALTY} team."},
    {PiiCategory::kIdn, "MRN: {MRN}"},
    {PiiCategory::kIdn, "FIN {FIN}"},
    {PiiCategory::kIdn, "Pager {PAGER} for any queries."},
    {PiiCategory::kIdn, "URN {MRN}"},
    {PiiCategory::kPhone, "Ph: {PHONE}"},
    {PiiCategory::kPhone, "Fax: {PHONE}"},
    {PiiCategory::kPhone, "Please contact the ward on {PHONE} with any concerns."},
    {PiiCategory::kPhone, "GP practice Ph: {PHONE} Fax: {PHONE}"},
    {PiiCategory::kPhone, "{DR}{LASTNAME} can be contacted on {PHONE}."},
    {PiiCategory::kAddress, "Address: {ADDRESS}"},
    {PiiCategory::kAddress, "Lives at {ADDRESS} with {RELATION}."},
    {PiiCategory::kAddress, "GP address: {ADDRESS}"},
    {PiiCategory::kAddress, "Discharged home to {ADDRESS}."},
    {PiiCategory::kDob, "Sex: {SEX} DOB: {DOB}"},
    {PiiCategory::kDob, "Date of Birth: {DOB}"},
    {PiiCategory::kDob, "DOB {DOB}"},
};

struct Filler {
  double weight;
  std::string_view text;
};

// The handover lines share their frame with PERSON templates; {TEAM} is an
// invented capitalized word, so only the class prior separates the two.
constexpr Filler kFiller[] = {
    {1, "Admission date: {DATE}"},
    {1, "Discharge date: {DATE}"},
    {1, "Principal diagnosis: {CONDITION}"},
    {1, "BP {SYS}/{DIA}, HR {NUM}, SpO2 {SAT}% on room air."},
    {1, "Hb {NUM} g/L, WCC {DEC}, Creatinine {NUM} umol/L."},
    {1, "{DRUG} {DOSE} mg {FREQ}"},
    {1, "History of {EPONYM} disease, stable on current therapy."},
    {1, "{EPONYM} manoeuvre performed with good effect."},
    {1, "Underwent {EPONYM} procedure on {DATE} without complication."},
    {1, "Follow up in {SMALL} weeks in the outpatient clinic."},
    {1, "Plan: continue current medications and review in {SMALL} days."},
    {1, "Ward {SMALL} West, bed {SMALL}."},
    {1, "Patient was afebrile and haemodynamically stable throughout admission."},
    {1, "Chest X-ray showed no acute changes."},
    {1, "CT brain on {DATE} was unremarkable."},
    {1, "Tolerating oral diet and fluids."},
    {1, "Wound reviewed, clean and dry, sutures to be removed in {SMALL} days."},
    {1, "Pain well controlled with regular paracetamol."},
    {1, "Bowels opened, passing urine normally."},
    {1, "Allergies: nil known."},
    {1, "Medications on discharge:"},
    {1, "Issues during admission:"},
    {1, "Presenting complaint: {CONDITION}"},
    {1, "Blood cultures on {DATE} returned no growth."},
    {1, "ECG sinus rhythm, rate {NUM}, no ischaemic changes."},
    {1, "Referred to {SPECIALTY} for ongoing management."},
    {1, "Observations remained within normal limits."},
    {1, "INR {DEC} on {DATE}, warfarin dose adjusted."},
    {1, "Lactate {DEC} mmol/L, improved after fluids."},
    {1, "Social work input regarding home supports."},
    {1, "Dietitian reviewed, supplements commenced."},
    {1, "Occupational therapy home assessment completed."},
    {1, "Cannula removed prior to discharge."},
    {1, "Repeat bloods with GP in {SMALL} days."},
    {1, "Seen by {SPECIALTY} who recommended {DRUG} {DOSE} mg {FREQ}."},
    {1, "Reviewed in the {EPONYM} clinic, no further action."},
    {1, "{DRUG} ceased on {DATE} due to side effects."},
    {1, "Transferred to {SPECIALTY} Ward on {DATE}."},
    {0.25, "Handed over to {TEAM} overnight."},
    {0.25, "Care handed over to {TEAM} on the evening shift."},
};

constexpr std::string_view kSpecialties[] = {
    "Cardiology", "Respiratory", "Gastroenterology", "Geriatrics", "Neurology",
    "Renal", "Endocrinology", "General Surgery", "Orthopaedics", "Haematology"};
constexpr std::string_view kRelations[] = {"wife", "husband", "daughter", "son",
                                           "sister", "brother", "partner", "mother"};
constexpr std::string_view kRoles[] = {"Registrar", "Resident", "Intern",
                                       "Staff Specialist", "Fellow"};
constexpr std::string_view kConditions[] = {
    "community acquired pneumonia", "urinary tract infection", "cellulitis",
    "exacerbation of COPD", "congestive cardiac failure", "a fall",
    "atrial fibrillation", "acute kidney injury", "NSTEMI", "delirium",
    "gastroenteritis", "a fractured neck of femur"};
constexpr std::string_view kDrugs[] = {
    "Metoprolol", "Paracetamol", "Atorvastatin", "Pantoprazole", "Frusemide",
    "Apixaban", "Amoxicillin", "Metformin", "Perindopril", "Prednisolone"};
constexpr std::string_view kSyllables[] = {
    "ka", "lor", "ven", "mi", "dra", "son", "tel", "bri", "mon", "zak", "rin",
    "dal", "bur", "ste", "fen", "gor", "lis", "wen", "har", "qui", "tam", "ol"};
constexpr std::string_view kFreqs[] = {"daily", "bd", "tds", "nocte", "mane", "PRN"};

std::string pad2(std::int64_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(v));
  return buf;
}

std::string digits(Rng& rng, std::size_t n) {
  std::string s;
  s += static_cast<char>('1' + rng.index(9));
  for (std::size_t i = 1; i < n; ++i) s += static_cast<char>('0' + rng.index(10));
  return s;
}

const std::string& pick(Rng& rng, std::span<const std::string> items) {
  return items[rng.index(items.size())];
}

std::string date(Rng& rng, std::int64_t year_lo, std::int64_t year_hi) {
  const std::string sep = rng.chance(0.5) ? "-" : "/";
  return pad2(rng.between(1, 28)) + sep + pad2(rng.between(1, 12)) + sep +
         std::to_string(rng.between(year_lo, year_hi));
}

std::string phone(Rng& rng) {
  switch (rng.index(5)) {
    case 0: return digits(rng, 4) + " " + digits(rng, 4);
    case 1: return "(02) " + digits(rng, 4) + " " + digits(rng, 4);
    case 2: return "02 " + digits(rng, 4) + " " + digits(rng, 4);
    case 3: return "04" + digits(rng, 2) + " " + digits(rng, 3) + " " + digits(rng, 3);
    default: return digits(rng, 4) + "-" + digits(rng, 4);
  }
}

std::string address(Rng& rng) {
  std::string s;
  if (rng.chance(0.25)) s += "Unit " + std::to_string(rng.between(1, 30)) + "/";
  s += std::to_string(rng.between(1, 250)) + " " + pick(rng, wordlists::streets()) +
       " " + pick(rng, wordlists::street_types());
  s += rng.chance(0.5) ? ", " : " ";
  s += pick(rng, wordlists::suburbs());
  if (rng.chance(0.8)) s += " NSW " + std::to_string(rng.between(2000, 2770));
  return s;
}

struct RenderedLine {
  std::string text;
  std::size_t length = 0;  // scalar values
  // Offsets relative to the line start.
  std::vector<PiiSpan> spans;
};

class LineRenderer {
 public:
  LineRenderer(Rng& rng, double noise_rate, double oov_rate)
      : rng_(rng), noise_rate_(noise_rate), oov_rate_(oov_rate) {}

  RenderedLine render(std::string_view tmpl) {
    RenderedLine out;
    glued_start_.reset();
    std::size_t i = 0;
    while (i < tmpl.size()) {
      if (tmpl[i] != '{') {
        const std::size_t j = std::min(tmpl.find('{', i), tmpl.size());
        append(out, tmpl.substr(i, j - i));
        i = j;
        continue;
      }
      const std::size_t close = tmpl.find('}', i);
      expand(out, tmpl.substr(i + 1, close - i - 1));
      i = close + 1;
    }
    return out;
  }

 private:
  void append(RenderedLine& out, std::string_view s) {
    out.text += s;
    out.length += utf8::length(s);
  }

  void pii(RenderedLine& out, PiiCategory c, const std::string& value) {
    std::size_t start = out.length;
    if (glued_start_) {
      start = *glued_start_;
      glued_start_.reset();
    }
    append(out, value);
    out.spans.push_back({start, out.length, c, SpanSource::kHuman, {}});
  }

  std::string name(std::span<const std::string> list) {
    if (!rng_.chance(oov_rate_)) return pick(rng_, list);
    return invented();
  }

  std::string invented() {
    std::string s;
    const auto n = rng_.between(2, 3);
    for (std::int64_t i = 0; i < n; ++i) s += pick(rng_, kSyllables);
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
  }

  void expand(RenderedLine& out, std::string_view key) {
    if (key == "DR") {
      if (rng_.chance(noise_rate_)) {
        if (rng_.chance(0.5)) {
          glued_start_ = out.length;
          append(out, "Dr");
        } else {
          append(out, "Pro ");
        }
      } else {
        append(out, "Dr ");
      }
    } else if (key == "FULLNAME") {
      pii(out, PiiCategory::kPerson,
          name(wordlists::first_names()) + " " + name(wordlists::last_names()));
    } else if (key == "LASTNAME") {
      pii(out, PiiCategory::kPerson, name(wordlists::last_names()));
    } else if (key == "FIRSTNAME") {
      pii(out, PiiCategory::kPerson, name(wordlists::first_names()));
    } else if (key == "ADDRESS") {
      pii(out, PiiCategory::kAddress, address(rng_));
    } else if (key == "DOB") {
      pii(out, PiiCategory::kDob, date(rng_, 1930, 2005));
    } else if (key == "MRN" || key == "FIN") {
      pii(out, PiiCategory::kIdn, digits(rng_, static_cast<std::size_t>(rng_.between(6, 8))));
    } else if (key == "PAGER") {
      pii(out, PiiCategory::kIdn, digits(rng_, 6));
    } else if (key == "PHONE") {
      pii(out, PiiCategory::kPhone, phone(rng_));
    } else if (key == "AGE") {
      append(out, std::to_string(rng_.between(18, 97)));
    } else if (key == "SEXWORD") {
      append(out, rng_.chance(0.5) ? "man" : "woman");
    } else if (key == "SEX") {
      append(out, rng_.chance(0.5) ? "Male" : "Female");
    } else if (key == "TITLE") {
      append(out, pick(rng_, {"Mr", "Mrs", "Ms"}));
    } else if (key == "SPECIALTY") {
      append(out, pick(rng_, kSpecialties));
    } else if (key == "RELATION") {
      append(out, pick(rng_, kRelations));
    } else if (key == "ROLE") {
      append(out, pick(rng_, kRoles));
    } else if (key == "CONDITION") {
      append(out, pick(rng_, kConditions));
    } else if (key == "DATE") {
      append(out, date(rng_, 2015, 2025));
    } else if (key == "NUM") {
      append(out, std::to_string(rng_.between(40, 180)));
    } else if (key == "SYS") {
      append(out, std::to_string(rng_.between(95, 170)));
    } else if (key == "DIA") {
      append(out, std::to_string(rng_.between(50, 100)));
    } else if (key == "SAT") {
      append(out, std::to_string(rng_.between(88, 100)));
    } else if (key == "DEC") {
      append(out, std::to_string(rng_.between(1, 15)) + "." +
                      std::to_string(rng_.between(0, 9)));
    } else if (key == "SMALL") {
      append(out, std::to_string(rng_.between(1, 12)));
    } else if (key == "DOSE") {
      append(out, std::to_string(5 * rng_.between(1, 100)));
    } else if (key == "DRUG") {
      append(out, pick(rng_, kDrugs));
    } else if (key == "FREQ") {
      append(out, pick(rng_, kFreqs));
    } else if (key == "TEAM") {
      append(out, invented());
    } else if (key == "EPONYM") {
      append(out, pick(rng_, wordlists::eponyms()));
    } else {
      throw BadConfig("unknown template slot {" + std::string(key) + "}");
    }
  }

  template <std::size_t N>
  std::string_view pick(Rng& rng, const std::string_view (&items)[N]) {
    return items[rng.index(N)];
  }
  std::string_view pick(Rng& rng, std::initializer_list<std::string_view> items) {
    return *(items.begin() + static_cast<std::ptrdiff_t>(rng.index(items.size())));
  }
  const std::string& pick(Rng& rng, std::span<const std::string> items) {
    return items[rng.index(items.size())];
  }

  Rng& rng_;
  double noise_rate_;
  double oov_rate_;
  std::optional<std::size_t> glued_start_;
};

PiiCategory slot_category(std::string_view key) {
  if (key == "FULLNAME" || key == "LASTNAME" || key == "FIRSTNAME") return PiiCategory::kPerson;
  if (key == "ADDRESS") return PiiCategory::kAddress;
  if (key == "DOB") return PiiCategory::kDob;
  if (key == "PHONE") return PiiCategory::kPhone;
  return PiiCategory::kIdn;
}

bool is_pii_slot(std::string_view key) {
  for (auto k : {"FULLNAME", "LASTNAME", "FIRSTNAME", "ADDRESS", "DOB", "MRN", "FIN",
                 "PAGER", "PHONE"}) {
    if (key == k) return true;
  }
  return false;
}

// Lead-category probabilities whose expected entity mix equals `mix`.
// Templates add companion entities ("Patient: <name> MRN: <id>"), so leads
// are drawn from q solving E q = mix, where column c of E is the mean entity
// count per category of the templates led by c. Negative components are
// clamped and q renormalized.
std::array<double, kNumCategories> lead_distribution(
    const std::array<double, kNumCategories>& mix) {
  constexpr std::size_t C = kNumCategories;
  double e[C][C + 1] = {};
  std::array<std::size_t, C> n_templates{};
  for (const Template& t : kTemplates) {
    const auto lead = static_cast<std::size_t>(t.lead);
    ++n_templates[lead];
    for (std::size_t i = t.text.find('{'); i != std::string_view::npos;
         i = t.text.find('{', i + 1)) {
      const std::string_view key = t.text.substr(i + 1, t.text.find('}', i) - i - 1);
      if (is_pii_slot(key)) e[static_cast<std::size_t>(slot_category(key))][lead] += 1;
    }
  }
  for (std::size_t r = 0; r < C; ++r) {
    for (std::size_t c = 0; c < C; ++c) e[r][c] /= static_cast<double>(n_templates[c]);
    e[r][C] = mix[r];
  }
  // Gauss-Jordan with partial pivoting; E is diagonally dominant in practice.
  for (std::size_t col = 0; col < C; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < C; ++r) {
      if (std::abs(e[r][col]) > std::abs(e[piv][col])) piv = r;
    }
    std::swap(e[col], e[piv]);
    for (std::size_t r = 0; r < C; ++r) {
      if (r == col || e[r][col] == 0) continue;
      const double f = e[r][col] / e[col][col];
      for (std::size_t c = col; c <= C; ++c) e[r][c] -= f * e[col][c];
    }
  }
  std::array<double, C> q{};
  double sum = 0;
  for (std::size_t c = 0; c < C; ++c) {
    q[c] = std::max(0.0, e[c][C] / e[c][c]);
    sum += q[c];
  }
  if (sum <= 0) return mix;
  for (double& v : q) v /= sum;
  return q;
}

PiiCategory pick_category(Rng& rng, const std::array<double, kNumCategories>& weights) {
  double u = rng.uniform();
  for (std::size_t c = 0; c + 1 < kNumCategories; ++c) {
    if (u < weights[c]) return static_cast<PiiCategory>(c);
    u -= weights[c];
  }
  return static_cast<PiiCategory>(kNumCategories - 1);
}

std::string_view pick_filler(Rng& rng) {
  double total = 0;
  for (const Filler& f : kFiller) total += f.weight;
  double u = rng.uniform() * total;
  for (const Filler& f : kFiller) {
    if (u < f.weight) return f.text;
    u -= f.weight;
  }
  return kFiller[std::size(kFiller) - 1].text;
}

}  // namespace

void validate(const SynthConfig& config) {
  if (!(config.pii_line_density > 0.0 && config.pii_line_density <= 1.0)) {
    throw BadConfig("pii_line_density must lie in (0, 1]");
  }
  double sum = 0;
  for (double m : config.category_mix) {
    if (!(m >= 0.0)) throw BadConfig("category_mix entries must be >= 0");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 0.01) {
    throw BadConfig("category_mix must sum to 1 (got " + std::to_string(sum) + ")");
  }
  if (!(config.oov_name_rate >= 0.0 && config.oov_name_rate <= 1.0)) {
    throw BadConfig("oov_name_rate must lie in [0, 1]");
  }
  if (!(config.noise_rate >= 0.0 && config.noise_rate <= 1.0)) {
    throw BadConfig("noise_rate must lie in [0, 1]");
  }
  if (config.min_lines < 1 || config.min_lines > config.max_lines) {
    throw BadConfig("need 1 <= min_lines <= max_lines");
  }
}

std::pair<Document, std::vector<PiiSpan>> generate_document(
    const SynthConfig& config, std::size_t index) {
  validate(config);
  std::array<double, kNumCategories> mix = config.category_mix;
  const double total_mix = std::accumulate(mix.begin(), mix.end(), 0.0);
  for (double& m : mix) m /= total_mix;

  Rng rng(mix_seed(config.seed, index));
  const auto n_lines = static_cast<std::size_t>(rng.between(
      static_cast<std::int64_t>(config.min_lines),
      static_cast<std::int64_t>(config.max_lines)));
  auto n_pii = static_cast<std::size_t>(
      std::floor(static_cast<double>(n_lines) * config.pii_line_density + rng.uniform()));
  n_pii = std::min(n_pii, n_lines);

  std::vector<std::size_t> order(n_lines);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  std::vector<bool> is_pii(n_lines, false);
  for (std::size_t i = 0; i < n_pii; ++i) is_pii[order[i]] = true;

  std::vector<const Template*> by_lead[kNumCategories];
  for (const Template& t : kTemplates) {
    by_lead[static_cast<std::size_t>(t.lead)].push_back(&t);
  }

  const auto leads = lead_distribution(mix);
  LineRenderer renderer(rng, config.noise_rate, config.oov_name_rate);
  std::string text;
  std::vector<PiiSpan> gold;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < n_lines; ++l) {
    RenderedLine line;
    if (is_pii[l]) {
      const auto& options = by_lead[static_cast<std::size_t>(pick_category(rng, leads))];
      line = renderer.render(options[rng.index(options.size())]->text);
    } else if (l == 0) {
      line = renderer.render("DISCHARGE SUMMARY");
    } else {
      line = renderer.render(pick_filler(rng));
    }
    if (l > 0) {
      text += '\n';
      ++offset;
    }
    text += line.text;
    for (PiiSpan s : line.spans) {
      s.start += offset;
      s.end += offset;
      gold.push_back(s);
    }
    offset += line.length;
  }

  char id[32];
  std::snprintf(id, sizeof id, "synth-%05zu", index);
  return {Document(id, std::move(text)), std::move(gold)};
}

SynthCorpus generate_synthetic(const SynthConfig& config) {
  validate(config);
  SynthCorpus out;
  out.docs.reserve(config.n_docs);
  for (std::size_t i = 0; i < config.n_docs; ++i) {
    auto [doc, spans] = generate_document(config, i);
    out.gold[doc.id()] = std::move(spans);
    out.docs.push_back(std::move(doc));
  }
  return out;
}

}  // namespace deid
