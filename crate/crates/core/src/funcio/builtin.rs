use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{load_table, TableFunction};
use super::FuncError;
use crate::builder::{Arg, PairFunction};
use crate::exactnum::Rational;

/// Parsed function descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSpec {
    Product,
    Zero,
    RandTable { seed: u64, size: usize },
    ExpSeries { order: u32 },
    E0,
    Table { path: String },
}

impl FromStr for FunctionSpec {
    type Err = FuncError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || FuncError::UnknownDescriptor(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["product"] => Ok(FunctionSpec::Product),
            ["zero"] => Ok(FunctionSpec::Zero),
            ["e0"] => Ok(FunctionSpec::E0),
            ["expseries", k] => Ok(FunctionSpec::ExpSeries {
                order: k.parse().map_err(|_| unknown())?,
            }),
            ["randtable", seed, m] => Ok(FunctionSpec::RandTable {
                seed: seed.parse().map_err(|_| unknown())?,
                size: m.parse().map_err(|_| unknown())?,
            }),
            _ => match s.strip_prefix("table:") {
                Some(path) if !path.is_empty() => Ok(FunctionSpec::Table { path: path.to_string() }),
                _ => Err(unknown()),
            },
        }
    }
}

impl std::fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionSpec::Product => write!(f, "product"),
            FunctionSpec::Zero => write!(f, "zero"),
            FunctionSpec::E0 => write!(f, "e0"),
            FunctionSpec::ExpSeries { order } => write!(f, "expseries:{order}"),
            FunctionSpec::RandTable { seed, size } => write!(f, "randtable:{seed}:{size}"),
            FunctionSpec::Table { path } => write!(f, "table:{path}"),
        }
    }
}

impl FunctionSpec {
    pub fn instantiate(&self) -> Result<Arc<dyn PairFunction>, FuncError> {
        Ok(match self {
            FunctionSpec::Product => Arc::new(Product),
            FunctionSpec::Zero => Arc::new(Zero),
            FunctionSpec::E0 => Arc::new(E0Indicator),
            FunctionSpec::ExpSeries { order } => Arc::new(ExpSeries { order: *order }),
            FunctionSpec::RandTable { seed, size } => Arc::new(random_table(*seed, *size)),
            FunctionSpec::Table { path } => Arc::new(load_table(path)?),
        })
    }
}

/// Evaluator for a descriptor such as `product` or `randtable:7:5`.
pub fn builtin(descriptor: &str) -> Result<Arc<dyn PairFunction>, FuncError> {
    descriptor.parse::<FunctionSpec>()?.instantiate()
}

fn rational_payload<'a>(arg: &Arg<'a>) -> Result<&'a Rational, FuncError> {
    arg.point.as_rational().ok_or_else(|| FuncError::PayloadMismatch {
        label: arg.point.label.clone(),
        expected: "a rational payload",
    })
}

/// `f(x, y) = x·y` on rational payloads.
pub struct Product;

impl PairFunction for Product {
    fn descriptor(&self) -> String {
        "product".into()
    }

    fn eval(&self, x: Arg<'_>, y: Arg<'_>) -> Result<Rational, FuncError> {
        Ok(rational_payload(&x)? * rational_payload(&y)?)
    }
}

pub struct Zero;

impl PairFunction for Zero {
    fn descriptor(&self) -> String {
        "zero".into()
    }

    fn eval(&self, _: Arg<'_>, _: Arg<'_>) -> Result<Rational, FuncError> {
        Ok(Rational::zero())
    }
}

/// `Σ_{m ≤ order} (xy)^m / m!`, the exact truncation of `e^{xy}`.
pub struct ExpSeries {
    pub order: u32,
}

impl ExpSeries {
    pub fn value(&self, t: &Rational) -> Rational {
        let mut term = Rational::one();
        let mut sum = Rational::one();
        for m in 1..=self.order {
            term = &term * t / Rational::from(m as i64);
            sum += &term;
        }
        sum
    }
}

impl PairFunction for ExpSeries {
    fn descriptor(&self) -> String {
        format!("expseries:{}", self.order)
    }

    fn eval(&self, x: Arg<'_>, y: Arg<'_>) -> Result<Rational, FuncError> {
        Ok(self.value(&(rational_payload(&x)? * rational_payload(&y)?)))
    }
}

/// Indicator of eventual equality on eventually constant binary sequences.
pub struct E0Indicator;

impl PairFunction for E0Indicator {
    fn descriptor(&self) -> String {
        "e0".into()
    }

    fn eval(&self, x: Arg<'_>, y: Arg<'_>) -> Result<Rational, FuncError> {
        let payload = |a: &Arg<'_>| {
            a.point.as_e0().cloned().ok_or_else(|| FuncError::PayloadMismatch {
                label: a.point.label.clone(),
                expected: "an eventually constant bit sequence",
            })
        };
        let related = payload(&x)?.eventually_equal(&payload(&y)?);
        Ok(Rational::from(related as i64))
    }
}

/// Seeded `size × size` table of small rationals, indexed by position.
pub fn random_table(seed: u64, size: usize) -> TableFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..size)
        .map(|_| {
            (0..size)
                .map(|_| {
                    let p: i64 = rng.gen_range(-9..=9);
                    let q: i64 = rng.gen_range(1..=9);
                    Rational::new(BigInt::from(p), BigInt::from(q)).expect("q >= 1")
                })
                .collect()
        })
        .collect();
    TableFunction::new(format!("randtable:{seed}:{size}"), rows).expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{exp_enclosure, rat, IntervalValue};
    use crate::funcio::{E0Point, Point};

    fn arg(position: usize, point: &Point) -> Arg<'_> {
        Arg { position, point }
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["product", "zero", "e0", "expseries:8", "randtable:3:5", "table:/tmp/x.csv"] {
            assert_eq!(d.parse::<FunctionSpec>().unwrap().to_string(), d);
        }
        for d in ["", "sum", "expseries", "expseries:x", "randtable:1", "table:"] {
            assert!(matches!(d.parse::<FunctionSpec>(), Err(FuncError::UnknownDescriptor(_))), "{d}");
        }
    }

    #[test]
    fn product_and_series_values() {
        let (x, y) = (Point::rational("x", rat("2")), Point::rational("y", rat("3")));
        assert_eq!(Product.eval(arg(0, &x), arg(1, &y)).unwrap(), rat("6"));
        let one = Point::rational("1", rat("1"));
        let series = builtin("expseries:2").unwrap();
        assert_eq!(series.eval(arg(0, &one), arg(0, &one)).unwrap(), rat("5/2"));
        assert!(Product.eval(arg(0, &Point::bare("z")), arg(1, &y)).is_err());
    }

    #[test]
    fn e0_values() {
        let a = Point::e0("a", E0Point::new("01", 0).unwrap());
        let b = Point::e0("b", E0Point::new("1", 0).unwrap());
        let c = Point::e0("c", E0Point::new("1", 1).unwrap());
        assert_eq!(E0Indicator.eval(arg(0, &a), arg(1, &b)).unwrap(), rat("1"));
        assert_eq!(E0Indicator.eval(arg(0, &a), arg(2, &c)).unwrap(), rat("0"));
        let r = Point::rational("r", rat("1"));
        assert!(matches!(E0Indicator.eval(arg(0, &a), arg(1, &r)), Err(FuncError::PayloadMismatch { .. })));
    }

    #[test]
    fn e0_is_an_equivalence_indicator() {
        let pts: Vec<Point> = ["", "0", "1", "10", "011"]
            .iter()
            .flat_map(|p| (0..=1).map(move |t| Point::e0(format!("{p}/{t}"), E0Point::new(p, t).unwrap())))
            .collect();
        let rel = |i: usize, j: usize| E0Indicator.eval(arg(i, &pts[i]), arg(j, &pts[j])).unwrap().is_one();
        let n = pts.len();
        for i in 0..n {
            assert!(rel(i, i));
            for j in 0..n {
                assert_eq!(rel(i, j), rel(j, i));
                for k in 0..n {
                    if rel(i, j) && rel(j, k) {
                        assert!(rel(i, k));
                    }
                }
            }
        }
    }

    #[test]
    fn random_table_is_deterministic() {
        let a = random_table(42, 4);
        let b = random_table(42, 4);
        assert_eq!(a.rows(), b.rows());
        assert_ne!(random_table(43, 4).rows(), a.rows());
        let p = Point::bare("p");
        assert!(a.eval(arg(4, &p), arg(0, &p)).is_err());
    }

    #[test]
    fn series_within_truncation_error_of_exp() {
        // Tail of the order-K series at t is at most |t|^(K+1)/(K+1)! * 3^ceil|t|.
        let series = ExpSeries { order: 12 };
        for t in ["0", "1/2", "-1", "3/2", "2"] {
            let t = rat(t);
            let mut fact = BigInt::from(1);
            for m in 1..=13u32 {
                fact *= BigInt::from(m);
            }
            let tail = t.abs().pow(13) / Rational::from_integer(fact) * Rational::from(9);
            let approx = series.value(&t);
            let window = IntervalValue::new(&approx - &tail, &approx + &tail).unwrap();
            let exact = exp_enclosure(&t, &rat("1/1000000000")).unwrap();
            assert!(window.intersects(&exact), "t={t}");
        }
    }
}
