//! Homogeneous Poisson point processes on the square window `[-m/2, m/2]²`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::seed::{derive_stream, SeedSpec, GEOMETRY_STREAM};

/// A position in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Window, intensity and connection radius of one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDomain {
    /// Side of the window; the window is `[-side_m/2, side_m/2]²`.
    pub side_m: f64,
    /// Expected points per unit area.
    pub intensity_lambda: f64,
    /// Connection radius.
    pub radius_r: f64,
}

impl SimDomain {
    pub fn new(side_m: f64, intensity_lambda: f64, radius_r: f64) -> Result<Self> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!("{name} must be finite and positive, got {v}")))
            }
        };
        check("side m", side_m)?;
        check("intensity lambda", intensity_lambda)?;
        check("radius r", radius_r)?;
        if side_m < 2.0 * radius_r {
            return Err(Error::InvalidDomain(format!(
                "side m = {side_m} is smaller than one connection disk (2r = {})",
                2.0 * radius_r
            )));
        }
        Ok(Self {
            side_m,
            intensity_lambda,
            radius_r,
        })
    }

    /// Unit-radius domain, the setting used throughout.
    pub fn unit(side_m: f64, intensity_lambda: f64) -> Result<Self> {
        Self::new(side_m, intensity_lambda, 1.0)
    }

    pub fn half_side(&self) -> f64 {
        0.5 * self.side_m
    }

    pub fn area(&self) -> f64 {
        self.side_m * self.side_m
    }

    /// Expected number of sampled points, `λ m²`.
    pub fn expected_points(&self) -> f64 {
        self.intensity_lambda * self.area()
    }

    pub fn contains(&self, p: Point) -> bool {
        let h = self.half_side();
        (-h..=h).contains(&p.x) && (-h..=h).contains(&p.y)
    }

    /// Same window and radius at a different intensity.
    pub fn with_intensity(&self, intensity_lambda: f64) -> Result<Self> {
        Self::new(self.side_m, intensity_lambda, self.radius_r)
    }
}

/// A sampled point pattern with the source pinned at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    domain: SimDomain,
    coords: Vec<Point>,
    source_index: usize,
}

impl PointSet {
    /// Builds a point set from explicit coordinates.
    pub fn from_coords(domain: SimDomain, coords: Vec<Point>, source_index: usize) -> Result<Self> {
        if source_index >= coords.len() {
            return Err(Error::InvalidParams(format!(
                "source index {source_index} out of range for {} points",
                coords.len()
            )));
        }
        if coords[source_index] != Point::ORIGIN {
            return Err(Error::InvalidParams("source point must sit at the origin".into()));
        }
        if let Some(p) = coords.iter().find(|p| !domain.contains(**p)) {
            return Err(Error::InvalidParams(format!(
                "point ({}, {}) lies outside the window",
                p.x, p.y
            )));
        }
        Ok(Self {
            domain,
            coords,
            source_index,
        })
    }

    pub fn domain(&self) -> &SimDomain {
        &self.domain
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }

    /// Total number of points, the origin included.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Number of sampled points, i.e. excluding the origin.
    pub fn sampled_count(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Samples `N ~ Poisson(λ m²)` uniform points on the window and appends the
/// origin as the source.
pub fn sample_ppp(domain: &SimDomain, seed: SeedSpec) -> Result<PointSet> {
    // Re-validate: the fields are public.
    let domain = SimDomain::new(domain.side_m, domain.intensity_lambda, domain.radius_r)?;
    if seed.stream_id != GEOMETRY_STREAM {
        return Err(Error::InvalidParams(format!(
            "geometry must be drawn from stream {GEOMETRY_STREAM}, got {}",
            seed.stream_id
        )));
    }
    let mut rng = derive_stream(seed);
    let poisson = Poisson::new(domain.expected_points())
        .map_err(|e| Error::InvalidDomain(format!("poisson mean: {e}")))?;
    let count = poisson.sample(&mut rng) as usize;

    let side = domain.side_m;
    let h = domain.half_side();
    let mut coords = Vec::with_capacity(count + 1);
    for _ in 0..count {
        let x = -h + side * rng.random::<f64>();
        let y = -h + side * rng.random::<f64>();
        coords.push(Point::new(x.min(h), y.min(h)));
    }
    coords.push(Point::ORIGIN);
    Ok(PointSet {
        domain,
        coords,
        source_index: count,
    })
}
