#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fxtnes/linalg.hpp"

namespace fxtnes {

/// Whether players drive their own objective down or up. Maximizing
/// players follow -G.
enum class Sense { Minimize, Maximize };

class NoUniqueEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model-free view of a game: the only thing the seeking dynamics may touch.
/// Player indices are 0-based.
class CostOracle {
 public:
  virtual ~CostOracle() = default;
  virtual std::size_t players() const = 0;
  virtual double cost(std::size_t player, const Vector& u) const = 0;
};

/// N-player game with costs J_i(u) = u^T Q_i u + b_i^T u + c_i.
class QuadraticGame {
 public:
  QuadraticGame(std::vector<Matrix> q, std::vector<Vector> b,
                std::vector<double> c, Sense sense = Sense::Minimize);

  std::size_t players() const { return q_.size(); }
  const Matrix& q(std::size_t i) const { return q_.at(i); }
  const Vector& b(std::size_t i) const { return b_.at(i); }
  double c(std::size_t i) const { return c_.at(i); }
  Sense sense() const { return sense_; }
  /// +1 when minimizing, -1 when maximizing.
  double sense_sign() const { return sense_ == Sense::Minimize ? 1.0 : -1.0; }

  /// Same data scaled by s (Q_i, b_i and c_i all multiplied).
  QuadraticGame scaled(double s) const;

 private:
  std::vector<Matrix> q_;
  std::vector<Vector> b_;
  std::vector<double> c_;
  Sense sense_;
};

/// Affine vector field u -> M u + m.
struct AffineField {
  Matrix M;
  Vector m;

  Vector operator()(const Vector& u) const { return M * u + m; }
  std::size_t dim() const { return static_cast<std::size_t>(m.size()); }
};

/// Raw cost J_i(u), regardless of sense. Throws std::out_of_range.
double cost(const QuadraticGame& game, std::size_t player, const Vector& u);

/// Pseudo-gradient G(u): component i is dJ_i/du_i. Analysis use only.
Vector pseudo_gradient(const QuadraticGame& game, const Vector& u);

/// Closed form G(u) = M u + m with row i of M = e_i^T (Q_i + Q_i^T).
AffineField pseudo_gradient_affine(const QuadraticGame& game);

/// The field the players actually descend: sense_sign * G.
AffineField seeking_field(const QuadraticGame& game);

/// Root of the pseudo-gradient. Throws NoUniqueEquilibrium on singular M.
Vector nash_equilibrium(const QuadraticGame& game);
Vector affine_root(const AffineField& field);

enum class GameKind { Potential, StronglyMonotone, Both, Neither };
const char* to_string(GameKind kind);

struct GameClassification {
  GameKind kind = GameKind::Neither;
  /// lambda_min((M + M^T)/2); the game is strongly monotone iff > 0.
  double monotonicity_modulus = 0.0;
  /// Same quantity for the reversed field -G.
  double reversed_modulus = 0.0;
  /// lambda_min(M) when M is symmetric positive definite.
  std::optional<double> pl_modulus;
};

inline constexpr double kPotentialSymmetryTol = 1e-9;

GameClassification classify(const QuadraticGame& game);
GameClassification classify(const AffineField& field);

/// Modulus of the seeking field (what the fixed-time bounds use by default).
double seeking_modulus(const QuadraticGame& game);

/// P(u) = 1/2 u^T M u + m^T u for a symmetric pseudo-gradient Jacobian.
/// Throws std::logic_error when the game is not a potential game.
double potential_value(const QuadraticGame& game, const Vector& u);
double potential_value(const AffineField& field, const Vector& u);

/// Cost oracle that hands the dynamics sense_sign * J_i(u).
class QuadraticCostOracle final : public CostOracle {
 public:
  explicit QuadraticCostOracle(QuadraticGame game) : game_(std::move(game)) {}
  std::size_t players() const override { return game_.players(); }
  double cost(std::size_t player, const Vector& u) const override;
  const QuadraticGame& game() const { return game_; }

 private:
  QuadraticGame game_;
};

// Game definition documents: {"n_players", "Q", "b", "c", optional "sense"}.
QuadraticGame game_from_json(const nlohmann::json& doc);
nlohmann::json game_to_json(const QuadraticGame& game);
QuadraticGame load_game(const std::filesystem::path& path);

}  // namespace fxtnes
