#pragma once

// Extended real numbers: finite doubles plus -inf and +inf.
//
// All bounds, sides and activities in propmeter are ExtReal. Magnitudes at or
// beyond kInfThreshold are treated as infinite, which is the usual convention
// of MIP file formats and solvers.

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "propmeter/format.hpp"

namespace propmeter
{

inline constexpr double kInfThreshold = 1e20;

/// Raised when an operation has no extended-real meaning (inf - inf, 0 * inf).
class ExtArithmeticError : public std::domain_error
{
 public:
   using std::domain_error::domain_error;
};

class ExtReal
{
 public:
   enum class Kind : std::uint8_t
   {
      kNegInf,
      kFinite,
      kPosInf
   };

   /// Finite zero.
   constexpr ExtReal() = default;

   static constexpr ExtReal
   neg_inf()
   {
      return ExtReal( Kind::kNegInf, 0.0 );
   }

   static constexpr ExtReal
   pos_inf()
   {
      return ExtReal( Kind::kPosInf, 0.0 );
   }

   /// Canonicalizing constructor. Throws std::invalid_argument on NaN.
   static ExtReal
   from( double raw )
   {
      if( std::isnan( raw ) )
         throw std::invalid_argument( "ExtReal: NaN is not an extended real" );
      if( raw >= kInfThreshold )
         return pos_inf();
      if( raw <= -kInfThreshold )
         return neg_inf();
      return ExtReal( Kind::kFinite, raw );
   }

   constexpr Kind
   kind() const
   {
      return kind_;
   }

   constexpr bool
   is_finite() const
   {
      return kind_ == Kind::kFinite;
   }

   constexpr bool
   is_pos_inf() const
   {
      return kind_ == Kind::kPosInf;
   }

   constexpr bool
   is_neg_inf() const
   {
      return kind_ == Kind::kNegInf;
   }

   constexpr bool
   is_infinite() const
   {
      return kind_ != Kind::kFinite;
   }

   /// Finite value. Throws std::logic_error for infinities.
   double
   value() const
   {
      if( kind_ != Kind::kFinite )
         throw std::logic_error( "ExtReal::value() called on an infinity" );
      return value_;
   }

   /// IEEE rendering: infinities map to +-HUGE_VAL.
   constexpr double
   to_double() const
   {
      switch( kind_ )
      {
      case Kind::kNegInf:
         return -std::numeric_limits<double>::infinity();
      case Kind::kPosInf:
         return std::numeric_limits<double>::infinity();
      default:
         return value_;
      }
   }

   constexpr std::weak_ordering
   operator<=>( const ExtReal& other ) const
   {
      if( kind_ != other.kind_ )
         return static_cast<int>( kind_ ) <=> static_cast<int>( other.kind_ );
      if( kind_ != Kind::kFinite )
         return std::weak_ordering::equivalent;
      if( value_ < other.value_ )
         return std::weak_ordering::less;
      if( value_ > other.value_ )
         return std::weak_ordering::greater;
      return std::weak_ordering::equivalent;
   }

   constexpr bool
   operator==( const ExtReal& other ) const
   {
      return ( *this <=> other ) == 0;
   }

   /// Bit-level identity (distinguishes 0.0 from -0.0). Used for determinism checks.
   bool
   identical( const ExtReal& other ) const
   {
      if( kind_ != other.kind_ )
         return false;
      if( kind_ != Kind::kFinite )
         return true;
      return std::signbit( value_ ) == std::signbit( other.value_ ) && value_ == other.value_;
   }

 private:
   constexpr ExtReal( Kind kind, double value ) : kind_( kind ), value_( value ) {}

   Kind kind_ = Kind::kFinite;
   double value_ = 0.0;
};

inline ExtReal
make_ext( double raw )
{
   return ExtReal::from( raw );
}

inline std::weak_ordering
ext_compare( const ExtReal& a, const ExtReal& b )
{
   return a <=> b;
}

inline ExtReal
ext_add( const ExtReal& a, const ExtReal& b )
{
   if( ( a.is_pos_inf() && b.is_neg_inf() ) || ( a.is_neg_inf() && b.is_pos_inf() ) )
      throw ExtArithmeticError( "ext_add: +inf + -inf is undefined" );
   if( a.is_infinite() )
      return a;
   if( b.is_infinite() )
      return b;
   return ExtReal::from( a.value() + b.value() );
}

inline ExtReal
ext_mul( const ExtReal& a, const ExtReal& b )
{
   if( a.is_finite() && b.is_finite() )
      return ExtReal::from( a.value() * b.value() );
   if( ( a.is_finite() && a.value() == 0.0 ) || ( b.is_finite() && b.value() == 0.0 ) )
      throw ExtArithmeticError( "ext_mul: 0 * inf is undefined" );
   const bool negative = ( a.to_double() < 0 ) != ( b.to_double() < 0 );
   return negative ? ExtReal::neg_inf() : ExtReal::pos_inf();
}

inline std::string
to_string( const ExtReal& x )
{
   if( x.is_pos_inf() )
      return "+inf";
   if( x.is_neg_inf() )
      return "-inf";
   return format_double( x.value() );
}

inline std::ostream&
operator<<( std::ostream& os, const ExtReal& x )
{
   return os << to_string( x );
}

} // namespace propmeter
