//! Cluster geometry: base-station ring, uniformly dropped UEs, nearest-BS
//! association, distance-dependent path loss and the inter-cluster noise
//! floor obtained from a hexagonal wrap-around of replica clusters.

mod config;

pub use config::{EeConstants, PathLossExponents, PerEntity, ScenarioConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, angle: f64) -> Self {
        Point {
            x: r * angle.cos(),
            y: r * angle.sin(),
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    fn offset(&self, by: &Point) -> Point {
        Point::new(self.x + by.x, self.y + by.y)
    }
}

/// Placement and large-scale fading of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTopology {
    pub bs_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// Serving BS of each UE.
    pub association: Vec<usize>,
    /// UEs served by each BS, ascending.
    pub cells: Vec<Vec<usize>>,
    /// `rho[u][c]`: attenuation between UE `u` and BS `c`.
    pub rho: Vec<Vec<f64>>,
    /// Per-UE noise plus inter-cluster interference, in watts.
    pub effective_noise: Vec<f64>,
}

impl ClusterTopology {
    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn cell_of(&self, ue: usize) -> usize {
        self.association[ue]
    }
}

/// Attenuation `(1 + d)^(-nu)`.
pub fn path_loss(distance_m: f64, exponent: f64) -> Result<f64> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be >= 0, got {distance_m}"
        )));
    }
    if !(exponent > 2.0 && exponent < 6.0) {
        return Err(Error::Domain(format!(
            "path-loss exponent must lie in (2, 6), got {exponent}"
        )));
    }
    Ok((1.0 + distance_m).powf(-exponent))
}

/// BS `k` of `count` sits at angle `2 pi k / count` on a circle of the given radius.
pub fn bs_ring(count: usize, radius: f64) -> Vec<Point> {
    (0..count)
        .map(|k| Point::polar(radius, 2.0 * PI * k as f64 / count as f64))
        .collect()
}

/// Nearest BS, lowest index on ties.
pub fn nearest_bs(ue: &Point, bs: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, p) in bs.iter().enumerate() {
        let d = ue.distance(p);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

pub fn place_network(config: &ScenarioConfig, seed: u64) -> Result<ClusterTopology> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bs_positions = bs_ring(config.num_bs, config.bs_ring_radius_m);
    let ue_positions: Vec<Point> = (0..config.num_ue)
        .map(|_| {
            let r = config.cluster_radius_m * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            Point::polar(r, phi)
        })
        .collect();
    topology_from_positions(config, bs_positions, ue_positions)
}

/// Builds association, attenuation and noise for explicit positions.
pub fn topology_from_positions(
    config: &ScenarioConfig,
    bs_positions: Vec<Point>,
    ue_positions: Vec<Point>,
) -> Result<ClusterTopology> {
    let association: Vec<usize> = ue_positions
        .iter()
        .map(|p| nearest_bs(p, &bs_positions))
        .collect();
    let mut cells = vec![Vec::new(); bs_positions.len()];
    for (u, &c) in association.iter().enumerate() {
        cells[c].push(u);
    }
    let rho = ue_positions
        .iter()
        .zip(&association)
        .map(|(p, &cell)| {
            bs_positions
                .iter()
                .enumerate()
                .map(|(c, b)| path_loss(p.distance(b), config.pathloss_exponents.get(cell, c)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut topology = ClusterTopology {
        bs_positions,
        ue_positions,
        association,
        cells,
        rho,
        effective_noise: Vec::new(),
    };
    topology.effective_noise = inter_cluster_noise(&topology, config, None)?;
    Ok(topology)
}

/// Centers of the surrounding clusters on a hexagonal lattice with spacing `2R`.
/// Tier 1 holds 6 centers, tier 2 a further 12.
pub fn replica_centers(cluster_radius: f64, tiers: u8) -> Vec<Point> {
    let spacing = 2.0 * cluster_radius;
    let mut centers = Vec::new();
    if tiers >= 1 {
        for k in 0..6 {
            centers.push(Point::polar(spacing, PI / 3.0 * k as f64));
        }
    }
    if tiers >= 2 {
        for k in 0..6 {
            centers.push(Point::polar(2.0 * spacing, PI / 3.0 * k as f64));
        }
        for k in 0..6 {
            centers.push(Point::polar(
                3f64.sqrt() * spacing,
                PI / 6.0 + PI / 3.0 * k as f64,
            ));
        }
    }
    centers
}

/// Per-UE `sigma^2` plus the average interference of every replica-cluster BS.
///
/// `activity[c]` is the fraction of subcarriers on which the replicas of BS `c`
/// transmit; `None` means every replica BS is on everywhere.
pub fn inter_cluster_noise(
    topology: &ClusterTopology,
    config: &ScenarioConfig,
    activity: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if config.inter_cluster_tiers > 2 {
        return Err(Error::Config(format!(
            "inter_cluster_tiers must be 0, 1 or 2, got {}",
            config.inter_cluster_tiers
        )));
    }
    if let Some(a) = activity {
        if a.len() != topology.num_bs() || a.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config(
                "activity snapshot needs one fraction in [0, 1] per BS".into(),
            ));
        }
    }
    let centers = replica_centers(config.cluster_radius_m, config.inter_cluster_tiers);
    let n = config.num_subcarriers as f64;
    topology
        .ue_positions
        .iter()
        .zip(&topology.association)
        .map(|(ue, &cell)| {
            let mut noise = config.noise_w;
            for center in &centers {
                for (c, bs) in topology.bs_positions.iter().enumerate() {
                    let on = activity.map_or(1.0, |a| a[c]);
                    if on == 0.0 {
                        continue;
                    }
                    let d = ue.distance(&bs.offset(center));
                    let g = path_loss(d, config.pathloss_exponents.get(cell, c))?;
                    noise += on * g * config.per_bs_power_w.get(c) / n;
                }
            }
            Ok(noise)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::desk()
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(0.0, 4.0).unwrap(), 1.0);
        let v = path_loss(300.0, 4.0).unwrap();
        assert!((v - 1.0 / 301f64.powi(4)).abs() < 1e-22);
        assert!((v - 1.21824e-10).abs() / v < 1e-5);
        assert!(path_loss(400.0, 4.0).unwrap() < v);
        assert!(matches!(path_loss(-1.0, 4.0), Err(Error::Domain(_))));
        assert!(path_loss(10.0, 6.5).is_err());
    }

    #[test]
    fn degenerate_ring_ties_to_lowest_index() {
        let mut c = cfg();
        c.num_bs = 4;
        c.bs_ring_radius_m = 0.0;
        let t = place_network(&c, 3).unwrap();
        assert!(t.bs_positions.iter().all(|p| p.norm() == 0.0));
        assert!(t.association.iter().all(|&a| a == 0));
        assert_eq!(t.cells[0].len(), c.num_ue);
    }

    #[test]
    fn placement_is_deterministic() {
        let mut c = cfg();
        c.bs_ring_radius_m = 300.0;
        let a = place_network(&c, 11).unwrap();
        let b = place_network(&c, 11).unwrap();
        assert_eq!(a, b);
        let other = place_network(&c, 12).unwrap();
        assert_ne!(a.ue_positions, other.ue_positions);
    }

    #[test]
    fn association_partitions_ues() {
        let t = place_network(&cfg(), 5).unwrap();
        let total: usize = t.cells.iter().map(Vec::len).sum();
        assert_eq!(total, t.num_ue());
        for (c, members) in t.cells.iter().enumerate() {
            for &u in members {
                assert_eq!(t.association[u], c);
            }
        }
        for row in &t.rho {
            assert!(row.iter().all(|&r| r > 0.0 && r <= 1.0));
        }
    }

    #[test]
    fn no_tiers_means_plain_awgn() {
        let mut c = cfg();
        c.inter_cluster_tiers = 0;
        let t = place_network(&c, 1).unwrap();
        assert!(t.effective_noise.iter().all(|&n| n == c.noise_w));
    }

    #[test]
    fn ue_at_origin_sees_identical_noise() {
        let mut c = cfg();
        c.inter_cluster_tiers = 1;
        c.num_ue = 3;
        let bs = bs_ring(c.num_bs, c.bs_ring_radius_m);
        let t = topology_from_positions(&c, bs, vec![Point::ORIGIN; 3]).unwrap();
        assert!(t.effective_noise[0] > c.noise_w);
        assert_eq!(t.effective_noise[0], t.effective_noise[1]);
        assert_eq!(t.effective_noise[1], t.effective_noise[2]);
    }

    #[test]
    fn second_tier_adds_interference() {
        let mut c = cfg();
        c.inter_cluster_tiers = 1;
        let t1 = place_network(&c, 9).unwrap();
        c.inter_cluster_tiers = 2;
        let t2 = place_network(&c, 9).unwrap();
        for (a, b) in t1.effective_noise.iter().zip(&t2.effective_noise) {
            assert!(b > a);
        }
    }

    #[test]
    fn replica_lattice_sizes() {
        assert_eq!(replica_centers(1000.0, 0).len(), 0);
        assert_eq!(replica_centers(1000.0, 1).len(), 6);
        let two = replica_centers(1000.0, 2);
        assert_eq!(two.len(), 18);
        for p in &two[..6] {
            assert!((p.norm() - 2000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn activity_snapshot_scales_noise() {
        let c = cfg();
        let t = place_network(&c, 2).unwrap();
        let off = inter_cluster_noise(&t, &c, Some(&vec![0.0; c.num_bs])).unwrap();
        assert!(off.iter().all(|&n| n == c.noise_w));
        let half = inter_cluster_noise(&t, &c, Some(&vec![0.5; c.num_bs])).unwrap();
        for ((h, full), base) in half.iter().zip(&t.effective_noise).zip(&off) {
            assert!(((h - base) * 2.0 - (full - base)).abs() <= 1e-12 * full);
        }
    }
}
