#include "lada/synth.hpp"

#include <algorithm>
#include <sstream>

#include "lada/io.hpp"
#include "lada/rng.hpp"

namespace lada {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

// A template with literal tokens and typed entity slots.
struct Template {
  std::vector<std::string> tokens;  // literal tokens; empty string marks a slot
  std::vector<int> slot_types;      // per token: type index or -1
  std::vector<int> signature;       // slot count per type
};

Template compile_template(const std::string& text, const std::vector<std::string>& types) {
  Template t;
  t.signature.assign(types.size(), 0);
  for (const std::string& tok : split_ws(text)) {
    if (tok.size() >= 3 && tok.front() == '{' && tok.back() == '}') {
      const std::string name = tok.substr(1, tok.size() - 2);
      auto it = std::find(types.begin(), types.end(), name);
      if (it == types.end())
        throw ConfigError("template references undeclared type '" + name + "': " + text);
      const int ti = static_cast<int>(it - types.begin());
      t.tokens.push_back("");
      t.slot_types.push_back(ti);
      t.signature[static_cast<std::size_t>(ti)]++;
    } else {
      t.tokens.push_back(tok);
      t.slot_types.push_back(-1);
    }
  }
  if (t.tokens.empty()) throw ConfigError("empty template");
  return t;
}

// Renders a template with one gazetteer surface form per slot, producing
// gold BIO labels. Multi-word surfaces become B-t I-t... spans.
Sentence render(const Template& tpl, const std::vector<std::string>& slot_entities,
                const LabelSet& labels) {
  Sentence s;
  std::size_t next_slot = 0;
  for (std::size_t i = 0; i < tpl.tokens.size(); ++i) {
    if (tpl.slot_types[i] < 0) {
      s.tokens.push_back(tpl.tokens[i]);
      s.labels.push_back(labels.o_id());
      continue;
    }
    const int type = tpl.slot_types[i];
    const std::vector<std::string> words = split_ws(slot_entities.at(next_slot++));
    for (std::size_t w = 0; w < words.size(); ++w) {
      s.tokens.push_back(words[w]);
      s.labels.push_back(w == 0 ? labels.b_id(type) : labels.i_id(type));
    }
  }
  return s;
}

struct Generator {
  const SynthSpec& spec;
  const LabelSet& labels;
  std::vector<Template> templates;

  // Entity assignment of a generated sentence, grouped by type in slot order.
  struct Plan {
    int template_idx = -1;
    std::vector<std::vector<std::string>> by_type;  // per type index
  };

  Generator(const SynthSpec& sp, const LabelSet& lb) : spec(sp), labels(lb) {
    for (const std::string& t : sp.templates) templates.push_back(compile_template(t, sp.types));
    for (const Template& t : templates)
      for (std::size_t ti = 0; ti < spec.types.size(); ++ti)
        if (t.signature[ti] > 0) {
          auto it = spec.gazetteers.find(spec.types[ti]);
          if (it == spec.gazetteers.end() || it->second.empty())
            throw DataError("empty gazetteer for referenced type '" + spec.types[ti] + "'");
        }
  }

  const std::vector<std::string>& gazetteer(int type) const {
    return spec.gazetteers.at(spec.types[static_cast<std::size_t>(type)]);
  }

  Plan sample_plan(Rng& rng) const {
    Plan p;
    p.template_idx = static_cast<int>(rng.index(templates.size()));
    p.by_type.assign(spec.types.size(), {});
    const Template& t = templates[static_cast<std::size_t>(p.template_idx)];
    for (std::size_t i = 0; i < t.tokens.size(); ++i)
      if (t.slot_types[i] >= 0) {
        const auto& gaz = gazetteer(t.slot_types[i]);
        p.by_type[static_cast<std::size_t>(t.slot_types[i])].push_back(
            gaz[rng.index(gaz.size())]);
      }
    return p;
  }

  Sentence realize(const Plan& p) const {
    const Template& t = templates[static_cast<std::size_t>(p.template_idx)];
    std::vector<std::size_t> used(spec.types.size(), 0);
    std::vector<std::string> slot_entities;
    for (std::size_t i = 0; i < t.tokens.size(); ++i)
      if (t.slot_types[i] >= 0) {
        const auto ti = static_cast<std::size_t>(t.slot_types[i]);
        slot_entities.push_back(p.by_type[ti].at(used[ti]++));
      }
    return render(t, slot_entities, labels);
  }

  std::vector<int> candidates_with_signature(const std::vector<int>& sig, int exclude) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < templates.size(); ++i)
      if (static_cast<int>(i) != exclude && templates[i].signature == sig)
        out.push_back(static_cast<int>(i));
    return out;
  }

  // Templates whose signature differs from sig by `delta` (+1/-1) in exactly
  // one type.
  std::vector<int> candidates_off_by_one(const std::vector<int>& sig, int delta) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < templates.size(); ++i) {
      int diffs = 0;
      bool ok = true;
      for (std::size_t ti = 0; ti < sig.size(); ++ti) {
        const int d = templates[i].signature[ti] - sig[ti];
        if (d == 0) continue;
        if (d == delta) ++diffs;
        else { ok = false; break; }
      }
      if (ok && diffs == 1) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  // Re-renders the anchor plan's entity multiset into another template with
  // the same signature. When `violate`, tries a template with one extra or
  // one missing entity slot instead.
  Sentence paraphrase(const Plan& anchor, bool violate, Rng& rng) const {
    const std::vector<int>& sig = templates[static_cast<std::size_t>(anchor.template_idx)].signature;
    Plan p;
    p.by_type = anchor.by_type;
    for (auto& group : p.by_type) rng.shuffle(group);

    if (violate) {
      std::vector<int> add = candidates_off_by_one(sig, +1);
      if (!add.empty()) {
        p.template_idx = add[rng.index(add.size())];
        const std::vector<int>& nsig = templates[static_cast<std::size_t>(p.template_idx)].signature;
        for (std::size_t ti = 0; ti < sig.size(); ++ti)
          if (nsig[ti] > sig[ti]) {
            const auto& gaz = gazetteer(static_cast<int>(ti));
            p.by_type[ti].push_back(gaz[rng.index(gaz.size())]);
          }
        return realize(p);
      }
      std::vector<int> drop = candidates_off_by_one(sig, -1);
      if (!drop.empty()) {
        p.template_idx = drop[rng.index(drop.size())];
        const std::vector<int>& nsig = templates[static_cast<std::size_t>(p.template_idx)].signature;
        for (std::size_t ti = 0; ti < sig.size(); ++ti)
          if (nsig[ti] < sig[ti])
            p.by_type[ti].erase(p.by_type[ti].begin() +
                                static_cast<std::ptrdiff_t>(rng.index(p.by_type[ti].size())));
        return realize(p);
      }
      // No off-by-one template exists; fall through to a faithful rewrite.
    }
    std::vector<int> same = candidates_with_signature(sig, anchor.template_idx);
    p.template_idx = same.empty() ? anchor.template_idx : same[rng.index(same.size())];
    return realize(p);
  }
};

}  // namespace

SynthSpec SynthSpec::parse(const std::string& text) {
  SynthSpec spec;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("synth spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "types") spec.types = split_list(value, ',');
      else if (key == "count_labeled") spec.count_labeled = std::stoi(value);
      else if (key == "count_unlabeled") spec.count_unlabeled = std::stoi(value);
      else if (key == "count_dev") spec.count_dev = std::stoi(value);
      else if (key == "count_test") spec.count_test = std::stoi(value);
      else if (key == "paraphrases_per_unlabeled") spec.paraphrases_per_unlabeled = std::stoi(value);
      else if (key == "violation_fraction") spec.violation_fraction = std::stod(value);
      else if (key == "template") spec.templates.push_back(value);
      else if (key.rfind("gazetteer ", 0) == 0) {
        const std::string type = trim(key.substr(10));
        auto& gaz = spec.gazetteers[type];
        for (std::string& e : split_list(value, ',')) gaz.push_back(std::move(e));
      } else {
        throw ConfigError("synth spec line " + std::to_string(line_no) + ": unknown key '" +
                          key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("synth spec line " + std::to_string(line_no) + ": bad value '" +
                        value + "'");
    }
  }
  spec.validate();
  return spec;
}

SynthSpec SynthSpec::parse_file(const std::string& path) {
  return parse(read_file(path));
}

void SynthSpec::validate() const {
  if (types.empty()) throw ConfigError("synth spec: no entity types");
  if (templates.empty()) throw ConfigError("synth spec: no templates");
  if (count_labeled < 1) throw ConfigError("synth spec: count_labeled must be >= 1");
  if (count_unlabeled < 0 || count_dev < 0 || count_test < 0)
    throw ConfigError("synth spec: counts must be non-negative");
  if (paraphrases_per_unlabeled < 1)
    throw ConfigError("synth spec: paraphrases_per_unlabeled must be >= 1");
  if (violation_fraction < 0.0 || violation_fraction > 1.0)
    throw ConfigError("synth spec: violation_fraction must be in [0, 1]");
  for (const auto& [type, gaz] : gazetteers) {
    if (std::find(types.begin(), types.end(), type) == types.end())
      throw ConfigError("synth spec: gazetteer for undeclared type '" + type + "'");
    if (gaz.empty()) throw ConfigError("synth spec: empty gazetteer list for '" + type + "'");
  }
}

Dataset gen_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Dataset d;
  d.labels = LabelSet::from_types(spec.types);
  Generator gen(spec, d.labels);
  Rng root(seed);
  Rng lab_rng = root.fork(1), unl_rng = root.fork(2), dev_rng = root.fork(3),
      test_rng = root.fork(4);

  auto gen_batch = [&](int count, Rng& rng) {
    std::vector<Sentence> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      Sentence s = gen.realize(gen.sample_plan(rng));
      s.origin_id = i;
      out.push_back(std::move(s));
    }
    return out;
  };

  d.labeled = gen_batch(spec.count_labeled, lab_rng);
  d.dev = gen_batch(spec.count_dev, dev_rng);
  d.test = gen_batch(spec.count_test, test_rng);

  for (int i = 0; i < spec.count_unlabeled; ++i) {
    Generator::Plan plan = gen.sample_plan(unl_rng);
    Sentence s = gen.realize(plan);
    s.origin_id = i;
    d.unlabeled.push_back(std::move(s));
    std::vector<Sentence>& group = d.paraphrases[i];
    for (int k = 0; k < spec.paraphrases_per_unlabeled; ++k) {
      const bool violate = unl_rng.uniform() < spec.violation_fraction;
      Sentence p = gen.paraphrase(plan, violate, unl_rng);
      p.origin_id = i;
      group.push_back(std::move(p));
    }
  }
  return d;
}

std::string builtin_synth_spec() {
  return R"(# synthetic sequence-labeling corpus
types = PER,LOC,ORG
count_labeled = 500
count_unlabeled = 1000
count_dev = 100
count_test = 500
paraphrases_per_unlabeled = 2
violation_fraction = 0.0

gazetteer PER = Ann, Bob, Carla, David, Elena, Farid, Grace, Hiro, Irene, Jonas
gazetteer PER = Karim, Laura, Miguel, Nadia, Oskar, Priya, Quentin, Rosa, Samuel, Tereza
gazetteer PER = Umar, Vera, Walter, Ximena, Yusuf, Zofia, Alice Walker, Brian Keller, Carmen Diaz, Daniel Reyes
gazetteer PER = Emma Larsen, Felix Moreau, Hana Suzuki, Igor Petrov, Julia Feldman, Kenji Tanaka, Lena Fischer, Marco Rossi, Nina Holm, Omar Haddad

gazetteer LOC = Oslo, Lima, Cairo, Delhi, Tokyo, Quito, Accra, Dublin, Geneva, Havana
gazetteer LOC = Jakarta, Kigali, Lisbon, Madrid, Nairobi, Ottawa, Prague, Riga, Seoul, Tunis
gazetteer LOC = Vienna, Warsaw, Zagreb, Athens, Bergen, Cusco, Derry, Evora, Fargo, Galway
gazetteer LOC = New York, Buenos Aires, Cape Town, San Marino, Hong Kong, Los Angeles, Porto Alegre, Kuala Lumpur, Tel Aviv, Abu Dhabi

gazetteer ORG = Acme, Globex, Initech, Vandelay, Hooli, Wonka, Cyberdyne, Soylent, Wayne, Stark
gazetteer ORG = Tyrell, Aperture, Umbrella, Massive, Monarch, Sirius, Gringotts, Duff, Oscorp, Zorin
gazetteer ORG = Vector Labs, Orion Bank, Zephyr Media, Atlas Group, Nimbus Software, Quantum Foundry, Harbor Trust, Crescent Airways, Summit Retail, Pioneer Energy
gazetteer ORG = Delta Mills, Beacon Press, Cedar Fund, Falcon Motors, Granite Works, Jade Consulting, Koala Games, Lotus Farms, Meteor Films, Nova Clinics

template = {PER} gave a short speech yesterday .
template = critics praised {PER} after the premiere .
template = the committee thanked {PER} for the donation .
template = {PER} published a second novel .
template = heavy rain flooded parts of {LOC} overnight .
template = tourism in {LOC} grew again this spring .
template = the festival returns to {LOC} next month .
template = residents of {LOC} protested the new tax .
template = {ORG} reported record profits this quarter .
template = regulators fined {ORG} over the breach .
template = {ORG} hired two hundred engineers this year .
template = {ORG} recalled its flagship product .
template = {PER} visits {LOC} today .
template = {PER} was born near {LOC} .
template = {PER} arrived in {LOC} on Friday .
template = after the storm {PER} left {LOC} quickly .
template = {PER} works for {ORG} .
template = {ORG} appointed {PER} as chief economist .
template = {PER} resigned from {ORG} last week .
template = {ORG} opened a factory in {LOC} .
template = {ORG} moved its headquarters to {LOC} .
template = {ORG} sponsors the {LOC} marathon .
template = {PER} debated {PER} on live radio .
template = {PER} and {PER} shared the award .
template = the road from {LOC} to {LOC} reopened .
template = flights between {LOC} and {LOC} resumed .
template = {ORG} outbid {ORG} for the contract .
template = {ORG} merged with {ORG} in March .
template = {PER} joined {ORG} in {LOC} .
template = in {LOC} , {PER} toured the {ORG} campus .
template = {PER} met {PER} in {LOC} .
template = {PER} interviewed {PER} outside {LOC} .
)";
}

}  // namespace lada
