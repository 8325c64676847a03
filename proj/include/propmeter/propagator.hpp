#pragma once

// Iterative bounds tightening over a linear constraint system.
//
// Two schedules are provided:
//  - immediate: constraints are visited in order and every accepted bound
//    change is written at once, so later constraints (and later variables of
//    the same constraint) see it within the same round. This is the classic
//    sequential propagator.
//  - deferred: every candidate of a round is computed against the bounds
//    frozen at round start; per bound the strongest candidate is applied at
//    round end. This mirrors a parallel propagator.
//
// Both converge to the same fixed point.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "propmeter/activity.hpp"
#include "propmeter/bounds.hpp"
#include "propmeter/problem.hpp"

namespace propmeter
{

enum class Variant
{
   kImmediate,
   kDeferred
};

enum class StopMode
{
   kFixpoint,
   kTolerance
};

inline const char*
to_string( Variant v )
{
   return v == Variant::kImmediate ? "immediate" : "deferred";
}

inline std::optional<Variant>
parse_variant( std::string_view s )
{
   if( s == "immediate" )
      return Variant::kImmediate;
   if( s == "deferred" )
      return Variant::kDeferred;
   return std::nullopt;
}

struct PropagationConfig
{
   Variant variant = Variant::kImmediate;
   int max_rounds = 100;
   /// tau: a change is significant if |new - old| / max(1, |old|) >= tau.
   double significance_rel_tol = 1e-3;
   /// A candidate is accepted only if it improves the bound by more than this.
   double accept_abs_tol = 1e-9;
   double integrality_eps = 1e-6;
   StopMode stop_mode = StopMode::kFixpoint;
   /// Skip redundant rows and detect infeasible rows from activities.
   bool use_status_checks = true;
   /// Order in which rows are visited; empty means 0..m-1.
   std::vector<std::size_t> constraint_order;

   /// Throws std::invalid_argument if the configuration is unusable for `num_rows` rows.
   void
   validate( std::size_t num_rows ) const
   {
      if( max_rounds <= 0 )
         throw std::invalid_argument( "max_rounds must be positive" );
      if( !( accept_abs_tol > 0 ) || !( integrality_eps > 0 ) || !( significance_rel_tol >= 0 ) )
         throw std::invalid_argument( "tolerances must be positive" );
      if( stop_mode == StopMode::kTolerance && !( accept_abs_tol < significance_rel_tol ) )
         throw std::invalid_argument( "accept_abs_tol must be below tau in tolerance mode" );
      if( !constraint_order.empty() )
      {
         if( constraint_order.size() != num_rows )
            throw std::invalid_argument( "constraint_order is not a permutation of the rows" );
         std::vector<bool> seen( num_rows, false );
         for( std::size_t i : constraint_order )
         {
            if( i >= num_rows || seen[i] )
               throw std::invalid_argument( "constraint_order is not a permutation of the rows" );
            seen[i] = true;
         }
      }
   }
};

struct BoundChange
{
   std::size_t var = 0;
   BoundSide side = BoundSide::kLower;
   ExtReal old_value;
   ExtReal new_value;
   /// Row that produced the candidate.
   std::size_t row = 0;

   bool
   is_infinite_reduction() const
   {
      return old_value.is_infinite();
   }

   /// |new - old| / max(1, |old|); +inf for infinite reductions.
   double
   relative_size() const
   {
      if( old_value.is_infinite() )
         return std::numeric_limits<double>::infinity();
      const double o = old_value.value();
      return std::abs( new_value.value() - o ) / std::max( 1.0, std::abs( o ) );
   }

   bool
   identical( const BoundChange& other ) const
   {
      return var == other.var && side == other.side && row == other.row &&
             old_value.identical( other.old_value ) && new_value.identical( other.new_value );
   }
};

struct RoundStats
{
   std::size_t round = 0;
   std::size_t num_changes = 0;
   std::size_t num_inf_reductions = 0;
   std::vector<BoundChange> changes;
   std::int64_t duration_ns = 0;
   /// Largest relative change size in the round (inf if it had an infinite reduction).
   double max_relative_change = 0.0;
};

enum class StopReason
{
   kFixpoint,
   kTolerance,
   kMaxRounds,
   kInfeasible
};

inline const char*
to_string( StopReason r )
{
   switch( r )
   {
   case StopReason::kFixpoint:
      return "fixpoint";
   case StopReason::kTolerance:
      return "tolerance";
   case StopReason::kMaxRounds:
      return "max_rounds";
   default:
      return "infeasible";
   }
}

struct PropagationTrace
{
   std::vector<RoundStats> rounds;
   bool fixpoint_reached = false;
   StopReason stop_reason = StopReason::kMaxRounds;
   /// Rounds containing at least one infinite-to-finite reduction.
   std::size_t rounds_with_inf_reductions = 0;
   std::size_t initial_infinite_bounds = 0;
   /// max_relative_change of the last round that changed anything. A tiny value
   /// at a fixpoint means the run stopped on accept_abs_tol while still
   /// converging asymptotically.
   double last_changing_round_max_relative_change = 0.0;

   std::size_t
   total_rounds() const
   {
      return rounds.size();
   }

   std::int64_t
   total_time_ns() const
   {
      std::int64_t t = 0;
      for( const auto& r : rounds )
         t += r.duration_ns;
      return t;
   }

   /// Same rounds and same changes, bit for bit. Durations are ignored.
   bool
   same_bound_sequence( const PropagationTrace& other ) const
   {
      if( rounds.size() != other.rounds.size() || stop_reason != other.stop_reason )
         return false;
      for( std::size_t r = 0; r < rounds.size(); ++r )
      {
         const auto& a = rounds[r].changes;
         const auto& b = other.rounds[r].changes;
         if( a.size() != b.size() )
            return false;
         for( std::size_t k = 0; k < a.size(); ++k )
            if( !a[k].identical( b[k] ) )
               return false;
      }
      return true;
   }
};

namespace detail
{

inline bool
improves_lower( const ExtReal& cand, const ExtReal& cur, double tol )
{
   return cand.is_finite() && ( cur.is_neg_inf() || cand.value() > cur.value() + tol );
}

inline bool
improves_upper( const ExtReal& cand, const ExtReal& cur, double tol )
{
   return cand.is_finite() && ( cur.is_pos_inf() || cand.value() < cur.value() - tol );
}

inline bool
crossed( const ExtReal& lower, const ExtReal& upper, double tol )
{
   if( lower.is_finite() && upper.is_finite() )
      return lower.value() > upper.value() + tol;
   return lower > upper;
}

inline void
mark_infeasible_var( BoundsState& s, std::size_t j )
{
   s.infeasible = true;
   if( !s.infeasible_var )
      s.infeasible_var = j;
}

inline void
record( RoundStats& stats, BoundChange change )
{
   ++stats.num_changes;
   if( change.is_infinite_reduction() )
      ++stats.num_inf_reductions;
   stats.max_relative_change = std::max( stats.max_relative_change, change.relative_size() );
   stats.changes.push_back( std::move( change ) );
}

template <typename Visit>
void
for_each_row( const ProblemInstance& inst, const PropagationConfig& cfg, Visit&& visit )
{
   if( cfg.constraint_order.empty() )
   {
      for( std::size_t i = 0; i < inst.num_rows(); ++i )
         if( !visit( i ) )
            return;
   }
   else
   {
      for( std::size_t i : cfg.constraint_order )
         if( !visit( i ) )
            return;
   }
}

inline void
round_immediate( const ProblemInstance& inst, BoundsState& state, const PropagationConfig& cfg,
                 RoundStats& stats )
{
   const double tol = cfg.accept_abs_tol;
   for_each_row( inst, cfg, [&]( std::size_t i ) {
      const LinearConstraint& c = inst.constraint( i );
      if( cfg.use_status_checks )
      {
         const auto status = constraint_status( c, state, tol );
         if( status == ConstraintStatus::kRedundant )
            return true;
         if( status == ConstraintStatus::kInfeasible )
         {
            state.infeasible = true;
            state.infeasible_row = i;
            return false;
         }
      }
      for( const Term& t : c.terms )
      {
         const std::size_t j = t.var;
         const auto cand =
             bound_candidates( c, state, j, inst.domain( j ).is_integer, cfg.integrality_eps );
         if( cand.lower.is_pos_inf() || cand.upper.is_neg_inf() )
         {
            mark_infeasible_var( state, j );
            return false;
         }
         if( improves_lower( cand.lower, state.lower[j], tol ) )
         {
            record( stats, BoundChange{ j, BoundSide::kLower, state.lower[j], cand.lower, i } );
            state.lower[j] = cand.lower;
         }
         if( improves_upper( cand.upper, state.upper[j], tol ) )
         {
            record( stats, BoundChange{ j, BoundSide::kUpper, state.upper[j], cand.upper, i } );
            state.upper[j] = cand.upper;
         }
         if( crossed( state.lower[j], state.upper[j], tol ) )
         {
            mark_infeasible_var( state, j );
            return false;
         }
      }
      return true;
   } );
}

struct DeferredCandidate
{
   ExtReal value;
   std::size_t row = 0;
};

inline void
round_deferred( const ProblemInstance& inst, BoundsState& state, const PropagationConfig& cfg,
                RoundStats& stats )
{
   const double tol = cfg.accept_abs_tol;
   const std::size_t n = inst.num_vars();
   std::vector<std::optional<DeferredCandidate>> best_lower( n ), best_upper( n );

   bool stop = false;
   for_each_row( inst, cfg, [&]( std::size_t i ) {
      const LinearConstraint& c = inst.constraint( i );
      if( cfg.use_status_checks )
      {
         const auto status = constraint_status( c, state, tol );
         if( status == ConstraintStatus::kRedundant )
            return true;
         if( status == ConstraintStatus::kInfeasible )
         {
            state.infeasible = true;
            state.infeasible_row = i;
            stop = true;
            return false;
         }
      }
      for( const Term& t : c.terms )
      {
         const std::size_t j = t.var;
         const auto cand =
             bound_candidates( c, state, j, inst.domain( j ).is_integer, cfg.integrality_eps );
         if( cand.lower.is_pos_inf() || cand.upper.is_neg_inf() )
         {
            mark_infeasible_var( state, j );
            stop = true;
            return false;
         }
         if( improves_lower( cand.lower, state.lower[j], tol ) )
         {
            auto& best = best_lower[j];
            if( !best || cand.lower > best->value || ( cand.lower == best->value && i < best->row ) )
               best = DeferredCandidate{ cand.lower, i };
         }
         if( improves_upper( cand.upper, state.upper[j], tol ) )
         {
            auto& best = best_upper[j];
            if( !best || cand.upper < best->value || ( cand.upper == best->value && i < best->row ) )
               best = DeferredCandidate{ cand.upper, i };
         }
      }
      return true;
   } );
   if( stop )
      return;

   for( std::size_t j = 0; j < n; ++j )
   {
      if( best_lower[j] )
      {
         record( stats, BoundChange{ j, BoundSide::kLower, state.lower[j], best_lower[j]->value,
                                     best_lower[j]->row } );
         state.lower[j] = best_lower[j]->value;
      }
      if( best_upper[j] )
      {
         record( stats, BoundChange{ j, BoundSide::kUpper, state.upper[j], best_upper[j]->value,
                                     best_upper[j]->row } );
         state.upper[j] = best_upper[j]->value;
      }
   }
   for( std::size_t j = 0; j < n; ++j )
      if( crossed( state.lower[j], state.upper[j], tol ) )
      {
         mark_infeasible_var( state, j );
         break;
      }
}

} // namespace detail

/// One pass over all rows. Updates `state` in place and returns the round's
/// statistics (duration is left at 0; the caller times rounds).
inline RoundStats
propagate_round( const ProblemInstance& inst, BoundsState& state, const PropagationConfig& cfg )
{
   if( state.infeasible )
      throw std::logic_error( "propagate_round: state is already infeasible" );
   RoundStats stats;
   if( cfg.variant == Variant::kImmediate )
      detail::round_immediate( inst, state, cfg, stats );
   else
      detail::round_deferred( inst, state, cfg, stats );
   return stats;
}

struct PropagationResult
{
   BoundsState state;
   PropagationTrace trace;
};

/// Runs rounds until a round accepts no change (fixpoint mode), a round has no
/// significant change (tolerance mode), infeasibility, or max_rounds.
///
/// `on_round(state, stats)` is invoked after each round outside the timed
/// region; `stats.duration_ns` is already set and floored at 1 ns.
template <typename OnRound>
PropagationResult
propagate_to_fixpoint( const ProblemInstance& inst, const PropagationConfig& cfg,
                       OnRound&& on_round )
{
   cfg.validate( inst.num_rows() );
   using Clock = std::chrono::steady_clock;

   PropagationResult result;
   result.state = BoundsState::start_of( inst );
   auto& trace = result.trace;
   trace.initial_infinite_bounds = result.state.count_infinite();
   trace.stop_reason = StopReason::kMaxRounds;

   for( int r = 1; r <= cfg.max_rounds; ++r )
   {
      const auto t0 = Clock::now();
      RoundStats stats = propagate_round( inst, result.state, cfg );
      const auto t1 = Clock::now();
      stats.round = static_cast<std::size_t>( r );
      stats.duration_ns = std::max<std::int64_t>(
          1, std::chrono::duration_cast<std::chrono::nanoseconds>( t1 - t0 ).count() );

      on_round( std::as_const( result.state ), std::as_const( stats ) );

      if( stats.num_inf_reductions > 0 )
         ++trace.rounds_with_inf_reductions;
      if( stats.num_changes > 0 )
         trace.last_changing_round_max_relative_change = stats.max_relative_change;
      const bool empty = stats.num_changes == 0;
      const bool insignificant = stats.num_inf_reductions == 0 &&
                                 stats.max_relative_change < cfg.significance_rel_tol;
      trace.rounds.push_back( std::move( stats ) );

      if( result.state.infeasible )
      {
         trace.stop_reason = StopReason::kInfeasible;
         break;
      }
      if( empty )
      {
         trace.fixpoint_reached = true;
         trace.stop_reason = StopReason::kFixpoint;
         break;
      }
      if( cfg.stop_mode == StopMode::kTolerance && insignificant )
      {
         trace.stop_reason = StopReason::kTolerance;
         break;
      }
   }
   return result;
}

inline PropagationResult
propagate_to_fixpoint( const ProblemInstance& inst, const PropagationConfig& cfg )
{
   return propagate_to_fixpoint( inst, cfg, []( const BoundsState&, const RoundStats& ) {} );
}

/// True iff both states are infeasible, or both are feasible and every bound
/// agrees: same infinity, or finite values within rel_tol * max(1, |a|).
/// Throws std::invalid_argument on a dimension mismatch.
inline bool
fixpoints_agree( const BoundsState& a, const BoundsState& b, double rel_tol = 1e-6 )
{
   if( a.lower.size() != b.lower.size() || a.upper.size() != b.upper.size() )
      throw std::invalid_argument( "fixpoints_agree: dimension mismatch" );
   if( a.infeasible || b.infeasible )
      return a.infeasible && b.infeasible;
   auto close = [rel_tol]( const ExtReal& x, const ExtReal& y ) {
      if( x.is_infinite() || y.is_infinite() )
         return x.kind() == y.kind();
      return std::abs( x.value() - y.value() ) <= rel_tol * std::max( 1.0, std::abs( x.value() ) );
   };
   for( std::size_t j = 0; j < a.size(); ++j )
      if( !close( a.lower[j], b.lower[j] ) || !close( a.upper[j], b.upper[j] ) )
         return false;
   return true;
}

} // namespace propmeter
