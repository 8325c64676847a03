#pragma once

// Algorithm-independent progress of a propagation run.
//
// Two scores are tracked per round:
//
//  * infinite progress  p_inf = n_current / n_total, the fraction of bounds
//    that go from infinite to finite between the start and the fixed point
//    which have already become finite;
//
//  * finite progress    p_fin = sum_j (score(lower_j) + score(upper_j)), where
//    a bound's score is its relative distance travelled from the weakest
//    reference value towards the fixed-point value. Normalized, the fixed
//    point scores 100.
//
// Both need the start state, the weakest bounds and the fixed point, which
// together form a ProgressReference. Scores are computed in one propagation
// pass and wall-clock times in a second, unperturbed pass of the same
// configuration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "propmeter/bounds.hpp"
#include "propmeter/propagator.hpp"
#include "propmeter/weakest_bounds.hpp"

namespace propmeter
{

/// Bound-score precondition violated (current outside [reference, limit]).
class ScoreContractError : public std::domain_error
{
 public:
   using std::domain_error::domain_error;
};

/// Measurement protocol failure: the scoring and timing passes diverged.
class MeasurementError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// The instance propagates to infeasibility; no progress can be measured.
class InfeasibleRunError : public std::runtime_error
{
 public:
   explicit InfeasibleRunError( PropagationTrace trace )
       : std::runtime_error( "instance is infeasible" ), trace_( std::move( trace ) )
   {
   }

   const PropagationTrace&
   trace() const
   {
      return trace_;
   }

 private:
   PropagationTrace trace_;
};

/// Number of bounds infinite in `start` and finite in `other`.
inline std::size_t
count_infinite_reductions( const BoundsState& start, const BoundsState& other )
{
   std::size_t n = 0;
   for( std::size_t j = 0; j < start.size(); ++j )
   {
      if( start.lower[j].is_neg_inf() && other.lower[j].is_finite() )
         ++n;
      if( start.upper[j].is_pos_inf() && other.upper[j].is_finite() )
         ++n;
   }
   return n;
}

/// n_current / n_total, or nullopt when n_total is 0.
inline std::optional<double>
progress_inf( const BoundsState& start, const BoundsState& current, std::size_t n_total )
{
   if( n_total == 0 )
      return std::nullopt;
   return static_cast<double>( count_infinite_reductions( start, current ) ) /
          static_cast<double>( n_total );
}

/// Score in [0, 1] of one bound: how far `current` has moved from `reference`
/// (the weakest value) towards `limit` (the fixed-point value).
///
/// Zero when the bound is still infinite, has not moved past the reference, or
/// when reference == limit. Throws ScoreContractError if a finite `current`
/// lies outside [reference, limit] by more than a 1e-9 relative slack.
inline double
bound_score( const ExtReal& reference, const ExtReal& current, const ExtReal& limit,
             BoundSide side )
{
   if( current.is_infinite() )
      return 0.0;
   if( reference.is_infinite() || limit.is_infinite() )
      throw ScoreContractError( "bound_score: finite bound without finite reference and limit" );

   const double ref = reference.value();
   const double cur = current.value();
   const double lim = limit.value();
   const double slack =
       1e-9 * std::max( { 1.0, std::abs( ref ), std::abs( lim ), std::abs( cur ) } );

   // Orient so that progress always means increasing values.
   const double sign = side == BoundSide::kLower ? 1.0 : -1.0;
   const double moved = sign * ( cur - ref );
   const double span = sign * ( lim - ref );
   if( moved < -slack || sign * ( lim - cur ) < -slack )
      throw ScoreContractError( "bound_score: current " + format_double( cur ) +
                                " outside [" + format_double( ref ) + ", " +
                                format_double( lim ) + "]" );
   if( ref == lim || moved <= 0.0 || span <= 0.0 )
      return 0.0;
   return std::clamp( moved / span, 0.0, 1.0 );
}

struct ProgressReference
{
   BoundsState start;
   WeakestBounds weakest;
   BoundsState limit;
   std::size_t n_total = 0;
   std::size_t max_score = 0;
   /// Bounds that take part in the finite score.
   std::vector<char> scored_lower;
   std::vector<char> scored_upper;
   std::vector<std::string> diagnostics;
};

/// Builds the reference from the fixed point of a run.
///
/// Bounds are excluded from the finite score when their weakest value cannot
/// be trusted: all initially infinite bounds if the weakest-bounds computation
/// hit its cap, and any bound whose weakest value and limit disagree in
/// finiteness.
inline ProgressReference
build_reference( const ProblemInstance& inst, WeakestBounds weakest, BoundsState limit )
{
   if( limit.infeasible )
      throw std::invalid_argument( "build_reference: limit state is infeasible" );
   if( weakest.size() != inst.num_vars() || limit.size() != inst.num_vars() )
      throw std::invalid_argument( "build_reference: dimension mismatch" );

   ProgressReference ref;
   ref.start = BoundsState::start_of( inst );
   ref.n_total = count_infinite_reductions( ref.start, limit );
   ref.scored_lower.assign( inst.num_vars(), 1 );
   ref.scored_upper.assign( inst.num_vars(), 1 );

   auto consider = [&]( std::size_t j, BoundSide side ) {
      const bool lower = side == BoundSide::kLower;
      const ExtReal& s = lower ? ref.start.lower[j] : ref.start.upper[j];
      const ExtReal& w = lower ? weakest.lower[j] : weakest.upper[j];
      const ExtReal& l = lower ? limit.lower[j] : limit.upper[j];
      char& scored = lower ? ref.scored_lower[j] : ref.scored_upper[j];
      const std::string what = ( lower ? "lower" : "upper" ) + std::string( " bound of " ) +
                               inst.var_name( j );
      if( s.is_infinite() && weakest.cap_hit )
      {
         scored = 0;
         if( l.is_finite() )
            ref.diagnostics.push_back( what + " excluded: weakest bounds hit the iteration cap" );
         return;
      }
      if( w.is_finite() != l.is_finite() )
      {
         scored = 0;
         ref.diagnostics.push_back( what + " excluded: weakest value " + to_string( w ) +
                                    " and limit " + to_string( l ) + " disagree in finiteness" );
         return;
      }
      if( !( w == l ) )
         ++ref.max_score;
   };
   for( std::size_t j = 0; j < inst.num_vars(); ++j )
   {
      consider( j, BoundSide::kLower );
      consider( j, BoundSide::kUpper );
   }
   ref.weakest = std::move( weakest );
   ref.limit = std::move( limit );
   return ref;
}

struct FiniteProgress
{
   double raw = 0.0;
   /// 100 * raw / max_score; nullopt when max_score is 0.
   std::optional<double> normalized;
};

inline FiniteProgress
progress_fin( const ProgressReference& ref, const BoundsState& current )
{
   FiniteProgress p;
   auto score = [&]( std::size_t j, BoundSide side ) {
      try
      {
         return bound_score( ref.weakest.bound( j, side ), current.bound( j, side ),
                             ref.limit.bound( j, side ), side );
      }
      catch( const ScoreContractError& e )
      {
         throw ScoreContractError( std::string( side == BoundSide::kLower ? "lower" : "upper" ) +
                                   " bound of variable " + std::to_string( j ) + ": " + e.what() );
      }
   };
   for( std::size_t j = 0; j < current.size(); ++j )
   {
      if( ref.scored_lower[j] )
         p.raw += score( j, BoundSide::kLower );
      if( ref.scored_upper[j] )
         p.raw += score( j, BoundSide::kUpper );
   }
   if( ref.max_score > 0 )
      p.normalized = 100.0 * p.raw / static_cast<double>( ref.max_score );
   return p;
}

struct ProgressSnapshot
{
   std::size_t round = 0;
   /// Wall-clock time at the end of the round, from the timing pass.
   std::int64_t time_ns = 0;
   std::size_t n_current = 0;
   std::optional<double> p_inf;
   double p_fin_raw = 0.0;
   std::optional<double> p_fin_normalized;
};

inline ProgressSnapshot
take_snapshot( const ProgressReference& ref, const BoundsState& current, std::size_t round )
{
   ProgressSnapshot s;
   s.round = round;
   s.n_current = count_infinite_reductions( ref.start, current );
   s.p_inf = progress_inf( ref.start, current, ref.n_total );
   const auto fin = progress_fin( ref, current );
   s.p_fin_raw = fin.raw;
   s.p_fin_normalized = fin.normalized;
   return s;
}

// ---------------------------------------------------------------------------
// Curves

struct CurveSample
{
   /// 0 for the prepended origin.
   std::size_t round = 0;
   double time_ns = 0.0;
   /// Normalized time in [0, 100].
   double t = 0.0;
   /// Normalized progress in [0, 100].
   double progress = 0.0;
};

struct ProgressCurve
{
   std::vector<CurveSample> samples;
   /// Number of rounds of the underlying run.
   std::size_t num_rounds = 0;
   /// Fewer than two rounds: the curve is the single segment (0,0)-(100,100).
   bool trivial = false;

   double
   total_time_ns() const
   {
      return samples.empty() ? 0.0 : samples.back().time_ns;
   }
};

/// Per-round input to normalize_curve.
struct RoundProgress
{
   std::size_t round = 0;
   std::int64_t time_ns = 0;
   double progress = 0.0;
};

/// Turns per-round scores into a piecewise-linear progress curve.
///
/// When the run reached a fixpoint, its last round is empty and repeats the
/// maximum score, so the second-to-last round is dropped and the maximum is
/// attributed to the end of the run. Afterwards, within a plateau of equal
/// scores only the first sample is kept (the final sample is always kept).
/// The origin (0, 0) is prepended and time is rescaled so the run ends at
/// 100.
inline ProgressCurve
normalize_curve( std::span<const RoundProgress> rounds, bool fixpoint_reached )
{
   ProgressCurve curve;
   curve.num_rounds = rounds.size();
   const double end_time = rounds.empty() ? 1.0 : static_cast<double>( rounds.back().time_ns );

   if( rounds.size() < 2 )
   {
      curve.trivial = true;
      curve.samples.push_back( CurveSample{ 0, 0.0, 0.0, 0.0 } );
      curve.samples.push_back(
          CurveSample{ rounds.empty() ? 0 : rounds.back().round, end_time, 100.0, 100.0 } );
      return curve;
   }

   std::vector<RoundProgress> kept( rounds.begin(), rounds.end() );
   if( fixpoint_reached )
      kept.erase( kept.end() - 2 );

   curve.samples.push_back( CurveSample{ 0, 0.0, 0.0, 0.0 } );
   for( std::size_t k = 0; k < kept.size(); ++k )
   {
      const bool last = k + 1 == kept.size();
      if( !last && !( kept[k].progress > curve.samples.back().progress ) )
         continue;
      const double time = static_cast<double>( kept[k].time_ns );
      curve.samples.push_back(
          CurveSample{ kept[k].round, time, 100.0 * time / end_time, kept[k].progress } );
   }
   curve.samples.back().t = 100.0;
   return curve;
}

// ---------------------------------------------------------------------------
// Two-pass measurement

enum class RunStatus
{
   kMeasured,
   /// Propagation found no bound change at all.
   kNoChanges
};

struct MeasuredRun
{
   Variant variant = Variant::kImmediate;
   RunStatus status = RunStatus::kMeasured;
   ProgressReference reference;
   /// Trace of the timing pass.
   PropagationTrace trace;
   BoundsState final_state;
   std::vector<ProgressSnapshot> snapshots;
   std::optional<ProgressCurve> finite_curve;
   std::optional<ProgressCurve> infinite_curve;
};

struct MeasureOptions
{
   WeakestBoundsOptions weakest;
};

/// Measures `cfg` on `inst` against precomputed weakest bounds.
///
/// The fixed point used as limit comes from a fixpoint-mode run of the same
/// variant. Pass 1 records scores after each round, pass 2 repeats the run
/// untouched and records round times. Throws InfeasibleRunError if the
/// instance propagates to infeasibility and MeasurementError if the passes
/// traverse different bound sequences.
inline MeasuredRun
measure_run( const ProblemInstance& inst, const PropagationConfig& cfg,
             const WeakestBounds& weakest )
{
   PropagationConfig limit_cfg = cfg;
   limit_cfg.stop_mode = StopMode::kFixpoint;
   auto limit_run = propagate_to_fixpoint( inst, limit_cfg );
   if( limit_run.state.infeasible )
      throw InfeasibleRunError( std::move( limit_run.trace ) );

   MeasuredRun run;
   run.variant = cfg.variant;
   run.reference = build_reference( inst, weakest, limit_run.state );

   std::vector<ProgressSnapshot> snapshots;
   auto scored = propagate_to_fixpoint(
       inst, cfg, [&]( const BoundsState& state, const RoundStats& stats ) {
          snapshots.push_back( take_snapshot( run.reference, state, stats.round ) );
       } );
   if( scored.state.infeasible )
      throw InfeasibleRunError( std::move( scored.trace ) );

   auto timed = propagate_to_fixpoint( inst, cfg );
   if( !scored.trace.same_bound_sequence( timed.trace ) )
      throw MeasurementError( "scoring and timing passes traversed different bounds" );
   if( cfg.stop_mode == StopMode::kFixpoint && !limit_run.trace.same_bound_sequence( timed.trace ) )
      throw MeasurementError( "limit and timing passes traversed different bounds" );

   std::int64_t elapsed = 0;
   for( std::size_t r = 0; r < snapshots.size(); ++r )
   {
      elapsed += timed.trace.rounds[r].duration_ns;
      snapshots[r].time_ns = elapsed;
   }

   run.trace = std::move( timed.trace );
   run.final_state = std::move( timed.state );
   run.snapshots = std::move( snapshots );

   std::size_t total_changes = 0;
   for( const auto& r : run.trace.rounds )
      total_changes += r.num_changes;
   if( total_changes == 0 )
   {
      run.status = RunStatus::kNoChanges;
      return run;
   }

   const bool fixpoint = run.trace.fixpoint_reached;
   if( run.reference.max_score > 0 )
   {
      std::vector<RoundProgress> pts;
      for( const auto& s : run.snapshots )
         pts.push_back( { s.round, s.time_ns, *s.p_fin_normalized } );
      run.finite_curve = normalize_curve( pts, fixpoint );
   }
   if( run.reference.n_total > 0 )
   {
      std::vector<RoundProgress> pts;
      for( const auto& s : run.snapshots )
         pts.push_back( { s.round, s.time_ns, 100.0 * *s.p_inf } );
      run.infinite_curve = normalize_curve( pts, fixpoint );
   }
   return run;
}

inline MeasuredRun
measure_run( const ProblemInstance& inst, const PropagationConfig& cfg,
             const MeasureOptions& opts = {} )
{
   return measure_run( inst, cfg, compute_weakest_bounds( inst, opts.weakest ) );
}

} // namespace propmeter
