//! Sparse binary state-action features from local board patterns.
//!
//! A [`FeatureSpec`] is a set of (offset, required content) elements anchored
//! at an action's target cell (and, for movement actions, also at the source
//! cell). A spec is active when *any* rotation/reflection of it matches the
//! board, so patterns are stored in one orientation only. The feature set
//! grows during self-play by appending offset-unions of frequently co-active
//! specs.

use crate::game::{Action, Cell, GameState, Rules};
use crate::geometry::{apply_symmetry, symmetry_count, unit_ball_offsets, Coord, GridKind};
use crate::training::ExperienceEntry;
use std::collections::{HashMap, HashSet};
use std::fmt;

/// Required content of one pattern cell, relative to the acting player.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum PatternCell {
    Empty,
    Friend,
    Enemy,
    OffBoard,
}

pub const PATTERN_CELLS: &[PatternCell] = &[
    PatternCell::Empty,
    PatternCell::Friend,
    PatternCell::Enemy,
    PatternCell::OffBoard,
];

impl PatternCell {
    fn token(self) -> &'static str {
        match self {
            PatternCell::Empty => "empty",
            PatternCell::Friend => "friend",
            PatternCell::Enemy => "enemy",
            PatternCell::OffBoard => "off",
        }
    }

    fn from_token(t: &str) -> Option<Self> {
        match t {
            "empty" => Some(PatternCell::Empty),
            "friend" => Some(PatternCell::Friend),
            "enemy" => Some(PatternCell::Enemy),
            "off" => Some(PatternCell::OffBoard),
            _ => None,
        }
    }
}

type Element = (Coord, PatternCell);

/// A local board pattern: non-empty, with at most one requirement per offset.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FeatureSpec {
    elements: Vec<Element>,
}

impl FeatureSpec {
    /// Build a spec from elements; rejects empty sets and offset conflicts.
    pub fn new(mut elements: Vec<Element>) -> Option<FeatureSpec> {
        if elements.is_empty() {
            return None;
        }
        elements.sort();
        elements.dedup();
        for w in elements.windows(2) {
            if w[0].0 == w[1].0 {
                return None; // same offset, different content
            }
        }
        Some(FeatureSpec { elements })
    }

    pub fn single(offset: Coord, content: PatternCell) -> FeatureSpec {
        FeatureSpec {
            elements: vec![(offset, content)],
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Offset-union of two specs; `None` when they disagree on an offset.
    pub fn union(&self, other: &FeatureSpec) -> Option<FeatureSpec> {
        let mut elements = self.elements.clone();
        elements.extend_from_slice(&other.elements);
        FeatureSpec::new(elements)
    }

    /// Canonical form under the grid's symmetry group: the lexicographically
    /// smallest symmetry image. Two specs match the same boards iff their
    /// canonical forms are equal.
    pub fn canonical(&self, kind: GridKind) -> Vec<Element> {
        self.images(kind)
            .into_iter()
            .min()
            .expect("spec has at least one image")
    }

    fn images(&self, kind: GridKind) -> Vec<Vec<Element>> {
        let mut images: Vec<Vec<Element>> = (0..symmetry_count(kind))
            .map(|s| {
                let mut img: Vec<Element> = self
                    .elements
                    .iter()
                    .map(|&(off, c)| (apply_symmetry(kind, s, off), c))
                    .collect();
                img.sort();
                img
            })
            .collect();
        images.sort();
        images.dedup();
        images
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (off, c) in &self.elements {
            write!(f, "({},{}:{})", off.x, off.y, c.token())?;
        }
        Ok(())
    }
}

/// Parse the line format produced by `Display`: `(dx,dy:content)` tuples.
pub fn parse_spec(line: &str) -> Option<FeatureSpec> {
    let mut elements = Vec::new();
    let line = line.trim();
    if line.is_empty() {
        return None;
    }
    for part in line.split(')') {
        if part.is_empty() {
            continue;
        }
        let part = part.strip_prefix('(')?;
        let (coords, content) = part.split_once(':')?;
        let (x, y) = coords.split_once(',')?;
        let off = Coord::new(x.trim().parse().ok()?, y.trim().parse().ok()?);
        elements.push((off, PatternCell::from_token(content.trim())?));
    }
    FeatureSpec::new(elements)
}

/// Indices-and-values view of the binary feature vector for one
/// state-action pair.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseFeatureVector {
    /// Strictly increasing active feature indices.
    pub active: Vec<u32>,
    pub dimension: u32,
}

impl SparseFeatureVector {
    pub fn empty(dimension: u32) -> Self {
        SparseFeatureVector {
            active: Vec::new(),
            dimension,
        }
    }
}

/// An ordered, versioned collection of feature specs. Immutable per version:
/// growth produces a new value and never reorders existing indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    kind: GridKind,
    specs: Vec<FeatureSpec>,
    // per spec: distinct symmetry images, each sorted
    images: Vec<Vec<Vec<Element>>>,
    canonical: HashSet<Vec<Element>>,
    version: u32,
}

impl FeatureSet {
    pub fn empty(kind: GridKind) -> FeatureSet {
        FeatureSet {
            kind,
            specs: Vec::new(),
            images: Vec::new(),
            canonical: HashSet::new(),
            version: 0,
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    /// Whether a spec equivalent to `spec` (up to symmetry) is present.
    pub fn contains(&self, spec: &FeatureSpec) -> bool {
        self.canonical.contains(&spec.canonical(self.kind))
    }

    fn push(&mut self, spec: FeatureSpec) {
        self.canonical.insert(spec.canonical(self.kind));
        self.images.push(spec.images(self.kind));
        self.specs.push(spec);
    }

    /// Rebuild a set from an ordered spec list (checkpoint loading). The
    /// list is taken as-is so stored indices stay valid.
    pub fn from_specs(kind: GridKind, specs: Vec<FeatureSpec>, version: u32) -> FeatureSet {
        let mut fs = FeatureSet::empty(kind);
        for spec in specs {
            fs.push(spec);
        }
        fs.version = version;
        fs
    }

    /// Append a spec not yet present (up to symmetry), bumping the version.
    /// Returns false (and leaves the set untouched) for duplicates.
    pub fn append_unique(&mut self, spec: FeatureSpec) -> bool {
        if self.contains(&spec) {
            return false;
        }
        self.push(spec);
        self.version += 1;
        true
    }
}

/// Deterministic initial feature set for a game: every single-cell pattern
/// with an offset within geometric distance 1 of the action cell, for each
/// content type.
pub fn atomic_features(rules: &dyn Rules) -> FeatureSet {
    let kind = rules.geometry().kind();
    let mut fs = FeatureSet::empty(kind);
    for off in unit_ball_offsets(kind) {
        for &content in PATTERN_CELLS {
            fs.push(FeatureSpec::single(off, content));
        }
    }
    fs.version = 1;
    fs
}

/// Compute the sparse feature vector for a legal state-action pair.
pub fn extract(
    rules: &dyn Rules,
    state: &GameState,
    action: Action,
    fs: &FeatureSet,
) -> SparseFeatureVector {
    let geom = rules.geometry();
    let mover = state.mover;
    let mut anchors = [Coord::new(0, 0); 2];
    let mut n_anchors = 0;
    anchors[n_anchors] = geom.coord_of(action.target());
    n_anchors += 1;
    if let Some(src) = action.source() {
        anchors[n_anchors] = geom.coord_of(src);
        n_anchors += 1;
    }
    let mut active = Vec::new();
    'spec: for (i, images) in fs.images.iter().enumerate() {
        for image in images {
            for &anchor in &anchors[..n_anchors] {
                let mut ok = true;
                for &(off, want) in image {
                    let have = match geom.index_of(anchor.add(off)) {
                        None => PatternCell::OffBoard,
                        Some(ci) => match state.cells[ci] {
                            Cell::Empty => PatternCell::Empty,
                            Cell::Piece(p) if p == mover => PatternCell::Friend,
                            Cell::Piece(_) => PatternCell::Enemy,
                        },
                    };
                    if have != want {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    active.push(i as u32);
                    continue 'spec;
                }
            }
        }
    }
    SparseFeatureVector {
        active,
        dimension: fs.len() as u32,
    }
}

/// Grow the feature set from the most recent game's experience: on each
/// entry's highest-valued action, count co-active spec pairs, and append the
/// offset-union of the top-scoring pair that is not already present.
/// Returns the grown set, or an unchanged clone when no candidate applies.
pub fn grow(fs: &FeatureSet, recent_experience: &[ExperienceEntry]) -> FeatureSet {
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    for entry in recent_experience {
        let Some(best) = entry
            .q_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
        else {
            continue;
        };
        let feats = &entry.features_per_action[best];
        for (k, &i) in feats.active.iter().enumerate() {
            for &j in &feats.active[k + 1..] {
                *counts.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<((u32, u32), u32)> = counts.into_iter().collect();
    // highest count first; ties broken by lowest index pair
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut grown = fs.clone();
    for ((i, j), _) in ranked {
        let (Some(a), Some(b)) = (fs.specs.get(i as usize), fs.specs.get(j as usize)) else {
            continue;
        };
        let Some(candidate) = a.union(b) else {
            continue;
        };
        if grown.append_unique(candidate) {
            return grown;
        }
    }
    grown
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rules_for, Player};
    use crate::policy::ActionDistribution;

    fn empty_entry() -> ExperienceEntry {
        // helper for growth tests; fields filled in by callers
        ExperienceEntry {
            state: GameState::initial(1),
            features_per_action: vec![],
            visit_distribution: ActionDistribution::new(vec![1.0]).unwrap(),
            q_values: vec![],
            feature_version: 1,
        }
    }

    #[test]
    fn atomic_counts_match_geometry() {
        let c4 = rules_for("connect4", 7).unwrap();
        assert_eq!(atomic_features(c4.as_ref()).len(), 36);
        let hex = rules_for("hex", 7).unwrap();
        let yav = rules_for("yavalath", 7).unwrap();
        assert_eq!(atomic_features(hex.as_ref()).len(), 28);
        assert_eq!(atomic_features(yav.as_ref()).len(), 28);
        // determinism
        let a = atomic_features(c4.as_ref());
        let b = atomic_features(c4.as_ref());
        assert_eq!(a.specs(), b.specs());
    }

    #[test]
    fn empty_set_extracts_empty_vector() {
        let g = rules_for("tictactoe", 7).unwrap();
        let fs = FeatureSet::empty(GridKind::Square);
        let s = g.initial();
        let v = extract(g.as_ref(), &s, Action::Place(0), &fs);
        assert_eq!(v.dimension, 0);
        assert!(v.active.is_empty());
    }

    #[test]
    fn spec_rejects_conflicting_offsets() {
        let a = (Coord::new(1, 0), PatternCell::Friend);
        let b = (Coord::new(1, 0), PatternCell::Enemy);
        assert!(FeatureSpec::new(vec![a, b]).is_none());
        assert!(FeatureSpec::new(vec![]).is_none());
        assert!(FeatureSpec::new(vec![a, a]).is_some());
    }

    #[test]
    fn union_merges_or_conflicts() {
        let a = FeatureSpec::single(Coord::new(1, 0), PatternCell::Friend);
        let b = FeatureSpec::single(Coord::new(-1, 0), PatternCell::Friend);
        let c = FeatureSpec::single(Coord::new(1, 0), PatternCell::Enemy);
        assert_eq!(a.union(&b).unwrap().elements().len(), 2);
        assert!(a.union(&c).is_none());
    }

    #[test]
    fn symmetric_duplicates_are_detected() {
        let mut fs = FeatureSet::empty(GridKind::Hex);
        let a = FeatureSpec::single(Coord::new(1, 0), PatternCell::Friend);
        let b = FeatureSpec::single(Coord::new(0, 1), PatternCell::Friend);
        assert!(fs.append_unique(a));
        // a rotated single-neighbour pattern matches exactly the same boards
        assert!(!fs.append_unique(b));
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn spec_line_format_round_trips() {
        let spec = FeatureSpec::new(vec![
            (Coord::new(-1, 0), PatternCell::Friend),
            (Coord::new(1, 0), PatternCell::Enemy),
            (Coord::new(0, 1), PatternCell::OffBoard),
        ])
        .unwrap();
        let line = spec.to_string();
        assert_eq!(parse_spec(&line).unwrap(), spec);
    }

    #[test]
    fn index_stability_under_growth() {
        let g = rules_for("yavalath", 7).unwrap();
        let fs = atomic_features(g.as_ref());
        let mut grown = fs.clone();
        let spec = FeatureSpec::new(vec![
            (Coord::new(-1, 0), PatternCell::Friend),
            (Coord::new(1, 0), PatternCell::Friend),
        ])
        .unwrap();
        assert!(grown.append_unique(spec));
        let mut s = g.initial();
        s = g.apply(&s, Action::Place(5)).unwrap();
        s = g.apply(&s, Action::Place(20)).unwrap();
        for a in g.legal_actions(&s).unwrap() {
            let old = extract(g.as_ref(), &s, a, &fs);
            let new = extract(g.as_ref(), &s, a, &grown);
            let restricted: Vec<u32> = new
                .active
                .iter()
                .copied()
                .filter(|&i| (i as usize) < fs.len())
                .collect();
            assert_eq!(old.active, restricted);
        }
    }

    #[test]
    fn growth_appends_union_of_co_active_pair() {
        // Synthetic 3-entry buffer over a 3-spec hex set. Specs 0 and 1 are
        // co-active on the best action of every entry, so their union is the
        // top candidate. Worked by hand: pair (0,1) scores 3, (0,2)/(1,2)
        // score 1 via the middle entry.
        let mut fs = FeatureSet::empty(GridKind::Hex);
        fs.append_unique(FeatureSpec::single(Coord::new(1, 0), PatternCell::Friend));
        fs.append_unique(FeatureSpec::single(Coord::new(0, 0), PatternCell::Empty));
        fs.append_unique(FeatureSpec::single(Coord::new(1, 0), PatternCell::Enemy));

        let make = |actives: Vec<Vec<u32>>, q: Vec<f64>| {
            let mut e = empty_entry();
            e.features_per_action = actives
                .into_iter()
                .map(|a| SparseFeatureVector {
                    active: a,
                    dimension: 3,
                })
                .collect();
            e.q_values = q;
            e
        };
        let entries = vec![
            make(vec![vec![0, 1], vec![2]], vec![0.9, -0.5]),
            make(vec![vec![0, 1, 2], vec![]], vec![0.4, 0.0]),
            make(vec![vec![2], vec![0, 1]], vec![-1.0, 0.2]),
        ];
        let grown = grow(&fs, &entries);
        assert_eq!(grown.len(), 4);
        assert_eq!(grown.version(), fs.version() + 1);
        let expected = fs.specs()[0].union(&fs.specs()[1]).unwrap();
        assert_eq!(
            grown.specs()[3].canonical(GridKind::Hex),
            expected.canonical(GridKind::Hex)
        );
        // next growth takes the runner-up pair (1,2); the (0,2) pair scores
        // the same but its union conflicts (same offset, different content)
        let again = grow(&grown, &entries);
        assert_eq!(again.len(), 5);
        let runner_up = fs.specs()[1].union(&fs.specs()[2]).unwrap();
        assert_eq!(
            again.specs()[4].canonical(GridKind::Hex),
            runner_up.canonical(GridKind::Hex)
        );
        // all candidate unions present -> unchanged
        let exhausted = grow(&again, &entries);
        assert_eq!(exhausted.len(), again.len());
        assert_eq!(exhausted.version(), again.version());
        // empty candidate pool -> unchanged
        let lonely = vec![make(vec![vec![0], vec![1]], vec![1.0, 0.0])];
        let same = grow(&fs, &lonely);
        assert_eq!(same.len(), fs.len());
    }

    #[test]
    fn movement_actions_match_at_source_anchor_too() {
        let g = rules_for("breakthrough", 7).unwrap();
        let mut fs = FeatureSet::empty(GridKind::Square);
        // Five friends below and beside the anchor. On the initial board this
        // matches around a front-rank pawn's own square (source anchor) but
        // not around its destination, in any orientation: the destination's
        // neighbourhood holds only three friendly pieces.
        let spec = FeatureSpec::new(vec![
            (Coord::new(-1, -1), PatternCell::Friend),
            (Coord::new(0, -1), PatternCell::Friend),
            (Coord::new(1, -1), PatternCell::Friend),
            (Coord::new(-1, 0), PatternCell::Friend),
            (Coord::new(1, 0), PatternCell::Friend),
        ])
        .unwrap();
        fs.append_unique(spec);
        let s = g.initial();
        assert_eq!(s.mover, Player::P1);
        let from = 11; // (3,1)
        let to = 19; // (3,2)
        let v = extract(g.as_ref(), &s, Action::Move { from, to }, &fs);
        assert_eq!(v.active, vec![0]);
        // the same pattern is inactive for a placement-style anchor at the
        // destination alone
        let v2 = extract(g.as_ref(), &s, Action::Place(to), &fs);
        assert!(v2.active.is_empty());
    }
}
