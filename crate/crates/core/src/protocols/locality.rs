use serde::{Deserialize, Serialize};

use super::Schedule;
use crate::operator::Partition;

/// Locality parameters of a schedule, maximised over its segments.
///
/// `k` is the largest partition, `m` the largest number of partitions sharing a
/// site, `s` the largest number of terms and `groups` the number of pairwise
/// disjoint groups found by first-fit colouring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityProfile {
    pub k: usize,
    pub m: usize,
    pub s: usize,
    pub groups: usize,
}

pub fn locality_profile(schedule: &Schedule) -> LocalityProfile {
    let mut acc = LocalityProfile { k: 0, m: 0, s: 0, groups: 0 };
    for seg in schedule.segments() {
        let parts: Vec<Partition> = seg.terms.iter().map(|t| t.partition.clone()).collect();
        let p = profile_of_partitions(schedule.n_sites(), &parts);
        acc.k = acc.k.max(p.k);
        acc.m = acc.m.max(p.m);
        acc.s = acc.s.max(p.s);
        acc.groups = acc.groups.max(p.groups);
    }
    acc
}

pub fn profile_of_partitions(n_sites: usize, partitions: &[Partition]) -> LocalityProfile {
    let mut count = vec![0usize; n_sites];
    for p in partitions {
        for &i in p.indices() {
            count[i] += 1;
        }
    }
    LocalityProfile {
        k: partitions.iter().map(Partition::k).max().unwrap_or(0),
        m: count.into_iter().max().unwrap_or(0),
        s: partitions.len(),
        groups: greedy_groups(partitions).len(),
    }
}

/// First-fit grouping of partition indices into pairwise-disjoint groups.
pub fn greedy_groups(partitions: &[Partition]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, p) in partitions.iter().enumerate() {
        match groups.iter_mut().find(|g| g.iter().all(|&j| !partitions[j].overlaps(p))) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(n: usize, v: &[&[usize]]) -> Vec<Partition> {
        v.iter().map(|p| Partition::new(p.to_vec(), n).unwrap()).collect()
    }

    #[test]
    fn worked_profiles() {
        let p = profile_of_partitions(3, &parts(3, &[&[0, 1]]));
        assert_eq!((p.k, p.m, p.s, p.groups), (2, 1, 1, 1));
        let p = profile_of_partitions(3, &parts(3, &[&[0, 1], &[1, 2], &[0, 2]]));
        assert_eq!((p.k, p.m, p.s, p.groups), (2, 2, 3, 3));
        let p = profile_of_partitions(6, &parts(6, &[&[0, 1, 2], &[0, 3, 4], &[1, 3, 5], &[2, 4, 5]]));
        assert_eq!((p.k, p.m, p.s, p.groups), (3, 2, 4, 4));
    }

    #[test]
    fn groups_are_disjoint_and_cover() {
        let ps = parts(5, &[&[0, 1], &[2, 3], &[1, 2], &[3, 4], &[4, 0]]);
        let g = greedy_groups(&ps);
        let mut all: Vec<usize> = g.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        for grp in &g {
            for (a, &i) in grp.iter().enumerate() {
                assert!(grp[..a].iter().all(|&j| !ps[i].overlaps(&ps[j])));
            }
        }
    }
}
