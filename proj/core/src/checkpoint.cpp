#include "lada/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "lada/io.hpp"

namespace lada {

namespace {

constexpr const char* kMagic = "lada-checkpoint 1";

std::string hexd(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError(std::string("checkpoint: malformed ") + what + " value '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const char* what) {
  try {
    return std::stol(s);
  } catch (const std::exception&) {
    throw DataError(std::string("checkpoint: malformed ") + what + " value '" + s + "'");
  }
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : is_(text) {}

  /// Next line with header comments skipped.
  std::string next(const char* what) {
    for (;;) {
      std::string line = raw(what);
      if (line.rfind("# ", 0) == 0 || line == "#") continue;
      return line;
    }
  }

  /// Next line verbatim (vocab tokens may look like comments).
  std::string raw(const char* what) {
    std::string line;
    if (!std::getline(is_, line))
      throw DataError(std::string("checkpoint: unexpected end of file before ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

 private:
  std::istringstream is_;
};

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt, const std::string& header_comment) {
  const EncoderConfig& c = ckpt.params.config;
  std::ostringstream os;
  os << kMagic << "\n";
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "encoder " << c.vocab_size << " " << c.n_tags << " " << c.max_len << " "
     << c.d_model << " " << c.n_heads << " " << c.d_ff << " " << c.n_layers << " "
     << hexd(c.ln_eps) << "\n";
  os << "types " << ckpt.labels.n_types();
  for (const std::string& t : ckpt.labels.types()) os << " " << t;
  os << "\n";
  os << "vocab " << ckpt.vocab.size() << "\n";
  for (const std::string& tok : ckpt.vocab.tokens()) os << tok << "\n";
  os << "params " << ckpt.params.store.size() << "\n";
  for (const Parameter& p : ckpt.params.store.all()) {
    os << "param " << p.name << " " << p.shape.size();
    for (int d : p.shape) os << " " << d;
    os << "\n";
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      if (i) os << " ";
      os << hexd(p.values[i]);
    }
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  LineReader r(text);
  if (r.next("magic") != kMagic)
    throw DataError("checkpoint: bad magic line (expected '" + std::string(kMagic) + "')");

  std::vector<std::string> enc = fields(r.next("encoder line"));
  if (enc.size() != 9 || enc[0] != "encoder")
    throw DataError("checkpoint: malformed encoder line");
  EncoderConfig cfg;
  cfg.vocab_size = static_cast<int>(parse_long(enc[1], "vocab_size"));
  cfg.n_tags = static_cast<int>(parse_long(enc[2], "n_tags"));
  cfg.max_len = static_cast<int>(parse_long(enc[3], "max_len"));
  cfg.d_model = static_cast<int>(parse_long(enc[4], "d_model"));
  cfg.n_heads = static_cast<int>(parse_long(enc[5], "n_heads"));
  cfg.d_ff = static_cast<int>(parse_long(enc[6], "d_ff"));
  cfg.n_layers = static_cast<int>(parse_long(enc[7], "n_layers"));
  cfg.ln_eps = parse_double(enc[8], "ln_eps");

  std::vector<std::string> ty = fields(r.next("types line"));
  if (ty.size() < 2 || ty[0] != "types") throw DataError("checkpoint: malformed types line");
  const long n_types = parse_long(ty[1], "type count");
  if (static_cast<long>(ty.size()) != 2 + n_types)
    throw DataError("checkpoint: types line count mismatch");
  LabelSet labels = LabelSet::from_types({ty.begin() + 2, ty.end()});

  std::vector<std::string> vo = fields(r.next("vocab line"));
  if (vo.size() != 2 || vo[0] != "vocab") throw DataError("checkpoint: malformed vocab line");
  const long n_vocab = parse_long(vo[1], "vocab size");
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(n_vocab));
  for (long i = 0; i < n_vocab; ++i) tokens.push_back(r.raw("vocab token"));
  Vocab vocab = Vocab::from_tokens(std::move(tokens));

  std::vector<std::string> pc = fields(r.next("params line"));
  if (pc.size() != 2 || pc[0] != "params") throw DataError("checkpoint: malformed params line");
  const long n_params = parse_long(pc[1], "param count");

  EncoderParams params;
  params.config = cfg;
  for (long i = 0; i < n_params; ++i) {
    std::vector<std::string> ph = fields(r.next("param header"));
    if (ph.size() < 3 || ph[0] != "param")
      throw DataError("checkpoint: malformed param header");
    const std::string name = ph[1];
    const long rank = parse_long(ph[2], "rank");
    if (static_cast<long>(ph.size()) != 3 + rank)
      throw DataError("checkpoint: param header dim count mismatch for '" + name + "'");
    Shape shape;
    for (long dd = 0; dd < rank; ++dd)
      shape.push_back(static_cast<int>(parse_long(ph[3 + dd], "dim")));
    std::vector<std::string> vals = fields(r.next("param values"));
    if (static_cast<std::int64_t>(vals.size()) != shape_numel(shape))
      throw DataError("checkpoint: value count mismatch for '" + name + "'");
    std::vector<double> values;
    values.reserve(vals.size());
    for (const std::string& v : vals) values.push_back(parse_double(v, "param"));
    params.store.add(name, std::move(shape), std::move(values));
  }
  if (r.next("end") != "end") throw DataError("checkpoint: missing end marker");
  if (vocab.size() != cfg.vocab_size)
    throw DataError("checkpoint: vocab size disagrees with encoder config");
  if (labels.n_tags() != cfg.n_tags)
    throw DataError("checkpoint: tag count disagrees with encoder config");
  return Checkpoint{std::move(params), std::move(vocab), std::move(labels)};
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const std::string& header_comment) {
  write_file(path, serialize_checkpoint(ckpt, header_comment));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path));
}

}  // namespace lada
