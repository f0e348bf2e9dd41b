//! Treatment cohorts: counties grouped by stay-at-home-order date.
//!
//! Counties sharing an order effective date form one treated cohort; every
//! county without an order on or before the cutoff falls into the single
//! never-treated pool. The groups partition the county universe.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::dates::Date;
use crate::error::{Error, Result};
use crate::series::Fips;

/// Identity of a county group: an order-date cohort or the control pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupId {
    Cohort(Date),
    Never,
}

impl GroupId {
    pub fn order_date(&self) -> Option<Date> {
        match self {
            GroupId::Cohort(d) => Some(*d),
            GroupId::Never => None,
        }
    }
}

impl core::fmt::Display for GroupId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GroupId::Cohort(d) => write!(f, "{d}"),
            GroupId::Never => f.write_str("never"),
        }
    }
}

/// One treatment cohort or the never-treated pool.
#[derive(Debug, Clone, PartialEq)]
pub struct CountyGroup {
    pub id: GroupId,
    pub members: BTreeSet<Fips>,
    /// Member count per state; the weights of the tests covariate.
    pub state_county_counts: BTreeMap<String, usize>,
}

impl CountyGroup {
    /// Number of member counties; the group's regression weight.
    pub fn county_count(&self) -> usize {
        self.members.len()
    }
}

/// Partition the county universe into order-date cohorts and the control pool.
///
/// `universe` maps every county to its state. Counties present in `orders`
/// with an effective date on or before `cutoff` join that date's cohort; all
/// remaining counties (no order, or an order after the cutoff) form the
/// never-treated group, which is always present even when empty.
pub fn group_counties(
    orders: &BTreeMap<Fips, Date>,
    universe: &BTreeMap<Fips, String>,
    cutoff: Date,
) -> Result<Vec<CountyGroup>> {
    if universe.is_empty() {
        return Err(Error::EmptyCountyUniverse);
    }
    let mut cohorts: BTreeMap<Date, CountyGroup> = BTreeMap::new();
    let mut never = CountyGroup {
        id: GroupId::Never,
        members: BTreeSet::new(),
        state_county_counts: BTreeMap::new(),
    };
    for (fips, state) in universe {
        let cohort_date = orders.get(fips).copied().filter(|d| *d <= cutoff);
        let group = match cohort_date {
            Some(date) => cohorts.entry(date).or_insert_with(|| CountyGroup {
                id: GroupId::Cohort(date),
                members: BTreeSet::new(),
                state_county_counts: BTreeMap::new(),
            }),
            None => &mut never,
        };
        group.members.insert(fips.clone());
        *group.state_county_counts.entry(state.clone()).or_insert(0) += 1;
    }
    let mut out: Vec<CountyGroup> = cohorts.into_values().collect();
    out.push(never);
    Ok(out)
}

/// The treated cohorts of a partition, in date order.
pub fn treated_cohorts(groups: &[CountyGroup]) -> Vec<&CountyGroup> {
    groups
        .iter()
        .filter(|g| matches!(g.id, GroupId::Cohort(_)))
        .collect()
}

/// The never-treated pool of a partition.
pub fn control_group(groups: &[CountyGroup]) -> Option<&CountyGroup> {
    groups.iter().find(|g| g.id == GroupId::Never)
}
