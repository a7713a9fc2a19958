#include "fxtnes/game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fxtnes {

QuadraticGame::QuadraticGame(std::vector<Matrix> q, std::vector<Vector> b,
                             std::vector<double> c, Sense sense)
    : q_(std::move(q)), b_(std::move(b)), c_(std::move(c)), sense_(sense) {
  const std::size_t n = q_.size();
  if (n < 2) throw std::invalid_argument("game needs at least 2 players");
  if (b_.size() != n || c_.size() != n)
    throw std::invalid_argument("game: Q, b and c must have one entry per player");
  const auto nn = static_cast<Eigen::Index>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (q_[i].rows() != nn || q_[i].cols() != nn)
      throw std::invalid_argument("game: Q_" + std::to_string(i + 1) +
                                  " is not " + std::to_string(n) + "x" +
                                  std::to_string(n));
    if (b_[i].size() != nn)
      throw std::invalid_argument("game: b_" + std::to_string(i + 1) +
                                  " has wrong length");
    if (!q_[i].allFinite() || !b_[i].allFinite() || !std::isfinite(c_[i]))
      throw std::invalid_argument("game: non-finite coefficient");
  }
}

QuadraticGame QuadraticGame::scaled(double s) const {
  auto q = q_;
  auto b = b_;
  auto c = c_;
  for (auto& m : q) m *= s;
  for (auto& v : b) v *= s;
  for (auto& x : c) x *= s;
  return QuadraticGame(std::move(q), std::move(b), std::move(c), sense_);
}

double cost(const QuadraticGame& game, std::size_t player, const Vector& u) {
  if (player >= game.players())
    throw std::out_of_range("player index " + std::to_string(player) +
                            " out of range");
  return u.dot(game.q(player) * u) + game.b(player).dot(u) + game.c(player);
}

Vector pseudo_gradient(const QuadraticGame& game, const Vector& u) {
  const std::size_t n = game.players();
  Vector g(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Matrix& q = game.q(i);
    g(ii) = q.row(ii).dot(u) + q.col(ii).dot(u) + game.b(i)(ii);
  }
  return g;
}

AffineField pseudo_gradient_affine(const QuadraticGame& game) {
  const auto n = static_cast<Eigen::Index>(game.players());
  AffineField f{Matrix(n, n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix& q = game.q(static_cast<std::size_t>(i));
    f.M.row(i) = q.row(i) + q.col(i).transpose();
    f.m(i) = game.b(static_cast<std::size_t>(i))(i);
  }
  return f;
}

AffineField seeking_field(const QuadraticGame& game) {
  auto f = pseudo_gradient_affine(game);
  const double s = game.sense_sign();
  f.M *= s;
  f.m *= s;
  return f;
}

Vector affine_root(const AffineField& field) {
  Eigen::FullPivLU<Matrix> lu(field.M);
  if (!lu.isInvertible())
    throw NoUniqueEquilibrium(
        "no unique equilibrium: pseudo-gradient Jacobian is singular");
  return lu.solve(-field.m);
}

Vector nash_equilibrium(const QuadraticGame& game) {
  return affine_root(pseudo_gradient_affine(game));
}

const char* to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Potential: return "potential";
    case GameKind::StronglyMonotone: return "strongly-monotone";
    case GameKind::Both: return "potential+strongly-monotone";
    case GameKind::Neither: return "neither";
  }
  return "unknown";
}

GameClassification classify(const AffineField& field) {
  GameClassification out;
  out.monotonicity_modulus = min_symmetric_eigenvalue(field.M);
  out.reversed_modulus = min_symmetric_eigenvalue(-field.M);
  const bool potential = asymmetry(field.M) <= kPotentialSymmetryTol;
  const bool monotone = out.monotonicity_modulus > 0.0;
  if (potential && monotone) {
    out.kind = GameKind::Both;
    out.pl_modulus = out.monotonicity_modulus;
  } else if (potential) {
    out.kind = GameKind::Potential;
  } else if (monotone) {
    out.kind = GameKind::StronglyMonotone;
  }
  return out;
}

GameClassification classify(const QuadraticGame& game) {
  return classify(pseudo_gradient_affine(game));
}

double seeking_modulus(const QuadraticGame& game) {
  return min_symmetric_eigenvalue(seeking_field(game).M);
}

double potential_value(const AffineField& field, const Vector& u) {
  if (asymmetry(field.M) > kPotentialSymmetryTol)
    throw std::logic_error("potential_value: pseudo-gradient is not a gradient");
  return 0.5 * u.dot(field.M * u) + field.m.dot(u);
}

double potential_value(const QuadraticGame& game, const Vector& u) {
  return potential_value(pseudo_gradient_affine(game), u);
}

double QuadraticCostOracle::cost(std::size_t player, const Vector& u) const {
  return game_.sense_sign() * fxtnes::cost(game_, player, u);
}

namespace {

Matrix matrix_from_json(const nlohmann::json& rows, std::size_t n) {
  if (!rows.is_array() || rows.size() != n)
    throw std::invalid_argument("game: each Q_i must have " +
                                std::to_string(n) + " rows");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix m(nn, nn);
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n)
      throw std::invalid_argument("game: each Q_i row must have " +
                                  std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& v, std::size_t n) {
  if (!v.is_array() || v.size() != n)
    throw std::invalid_argument("game: vector must have " + std::to_string(n) +
                                " entries");
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

}  // namespace

QuadraticGame game_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n_players").get<std::size_t>();
    const auto& q = doc.at("Q");
    const auto& b = doc.at("b");
    if (!q.is_array() || q.size() != n || !b.is_array() || b.size() != n)
      throw std::invalid_argument("game: Q and b need n_players entries");
    std::vector<Matrix> qs;
    std::vector<Vector> bs;
    std::vector<double> cs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      qs.push_back(matrix_from_json(q[i], n));
      bs.push_back(vector_from_json(b[i], n));
    }
    if (doc.contains("c")) {
      const auto& c = doc.at("c");
      if (!c.is_array() || c.size() != n)
        throw std::invalid_argument("game: c needs n_players entries");
      for (std::size_t i = 0; i < n; ++i) cs[i] = c[i].get<double>();
    }
    Sense sense = Sense::Minimize;
    if (doc.contains("sense")) {
      const auto s = doc.at("sense").get<std::string>();
      if (s == "maximize")
        sense = Sense::Maximize;
      else if (s != "minimize")
        throw std::invalid_argument("game: sense must be minimize or maximize");
    }
    return QuadraticGame(std::move(qs), std::move(bs), std::move(cs), sense);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game: malformed document: ") +
                                e.what());
  }
}

nlohmann::json game_to_json(const QuadraticGame& game) {
  nlohmann::json doc;
  const std::size_t n = game.players();
  doc["n_players"] = n;
  doc["sense"] = game.sense() == Sense::Minimize ? "minimize" : "maximize";
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < game.q(i).rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < game.q(i).cols(); ++c)
        row.push_back(game.q(i)(r, c));
      rows.push_back(row);
    }
    doc["Q"].push_back(rows);
    doc["b"].push_back(std::vector<double>(game.b(i).begin(), game.b(i).end()));
    doc["c"].push_back(game.c(i));
  }
  return doc;
}

QuadraticGame load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read game file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("game file " + path.string() +
                                " is not valid JSON: " + e.what());
  }
  return game_from_json(doc);
}

}  // namespace fxtnes
