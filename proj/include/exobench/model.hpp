#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace exobench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Error taxonomy shared by every module. The CLI maps IoError to exit code 2
// and everything else to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ModelError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};

enum class Axis { X, Y, Z };
enum class DofKind { Translation, Rotation };

Vec3 unit_vector(Axis axis);
std::string_view to_string(Axis axis);
std::string_view to_string(DofKind kind);

struct SegmentInertia {
  std::string name;
  double mass = 0.0;                  // kg
  Vec3 com = Vec3::Zero();            // m, segment frame
  Mat3 inertia = Mat3::Zero();        // kg m^2, about com, segment frame
  std::string provenance;

  bool operator==(const SegmentInertia&) const = default;
};

struct DofSpec {
  int coord = 0;  // 1-based generalized coordinate number
  Axis axis = Axis::X;
  DofKind kind = DofKind::Rotation;
  std::string name;
  // SI units (rad or m).
  std::optional<std::pair<double, double>> limits;
  bool actuated = false;

  bool operator==(const DofSpec&) const = default;
};

// Joints that share a child segment are composed in listed order; the anchor
// of every joint after the first is expressed in the frame left by the
// preceding joint on that child.
struct JointSpec {
  std::string name;
  std::string parent;  // "ground" for the moving base
  std::string child;
  Vec3 anchor = Vec3::Zero();  // m, parent frame
  std::vector<DofSpec> dofs;
  std::string provenance;

  bool operator==(const JointSpec&) const = default;
};

struct LoopCut {
  std::string name;
  std::string body_a;
  std::string body_b;
  Vec3 anchor_a = Vec3::Zero();
  Vec3 anchor_b = Vec3::Zero();
  int n_constraints = 3;
  std::vector<int> dependent_candidates;  // 1-based coordinate numbers

  bool operator==(const LoopCut&) const = default;
};

struct MarkerAttachment {
  std::string name;
  std::string segment;
  Vec3 local_position = Vec3::Zero();

  bool operator==(const MarkerAttachment&) const = default;
};

struct KinematicChain {
  std::string name;
  std::vector<SegmentInertia> segments;
  std::vector<JointSpec> joints;
  std::vector<LoopCut> loop_cuts;
  std::vector<MarkerAttachment> markers;
  Vec3 gravity{0.0, -9.81, 0.0};
  int n_coords = 23;

  bool operator==(const KinematicChain&) const = default;

  const SegmentInertia* find_segment(std::string_view segment) const;
  const DofSpec* find_dof(int coord) const;
};

struct GeneralizedState {
  double t = 0.0;
  VecX q;
  VecX qd;
  VecX qdd;
};

struct Wrench {
  Vec3 force = Vec3::Zero();   // N, applied at the segment com
  Vec3 torque = Vec3::Zero();  // N m
};

// Indexed like KinematicChain::segments. Empty means no external loads.
struct ExternalLoads {
  std::vector<Wrench> per_segment;

  bool empty() const { return per_segment.empty(); }
};

// Counts the prosthesis model is expected to have. validate_chain reports any
// mismatch; other shapes (test fixtures) are still usable by the solvers.
struct ChainProfile {
  int segments = 7;
  int coords = 23;
  int loop_cuts = 1;
  int joints = 9;  // tree joints plus loop cuts
};

struct Violation {
  std::string code;
  std::string location;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

// Parses the JSON model document without semantic validation.
KinematicChain parse_model(std::string_view config_text);

// Parses and validates; throws ModelError listing every violation.
KinematicChain load_model(std::string_view config_text,
                          const ChainProfile& profile = {});

KinematicChain load_model_file(const std::string& path,
                               const ChainProfile& profile = {});

std::string serialize_model(const KinematicChain& chain);

ValidationReport validate_chain(const KinematicChain& chain,
                                const ChainProfile& profile = {});

// Only the checks needed to build a solvable tree (indices, references,
// inertia sanity). Count checks from ChainProfile are skipped.
ValidationReport validate_structure(const KinematicChain& chain);

// "RU.pronation_supination" -> 19. Throws DomainError on unknown names.
int coordinate_index(const KinematicChain& chain, std::string_view name);

std::string coordinate_name(const KinematicChain& chain, int coord);

// The bundled prosthesis model shipped with the library.
std::string_view default_model_text();
KinematicChain default_model();

}  // namespace exobench
