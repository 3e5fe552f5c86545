//! One hour of dispatch: pick one level per device so that electricity,
//! heat, SNG and CO₂ requirements are covered at least cost.

use super::levels::Level;

/// Requirement slack on the balance rows, MW or t/h.
pub(crate) const BALANCE_TOL: f64 = 1e-9;

/// Right-hand sides of the coverage rows: electricity, heat, SNG, CO₂.
pub(crate) type Req = [f64; 4];

fn contrib(l: &Level) -> [f64; 4] {
    [l.elec, l.heat, l.sng, l.co2]
}

/// Level tables of one hour, sorted by cost within each device.
#[derive(Debug, Clone)]
pub(crate) struct HourTable {
    pub levels: Vec<Vec<Level>>,
    /// Position of each sorted level in the original table.
    order: Vec<Vec<usize>>,
    suffix_max: Vec<[f64; 4]>,
    suffix_min_cost: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HourChoice {
    /// Index into each device's original level table.
    pub pick: Vec<usize>,
    pub cost: f64,
    /// False when the node budget ran out and local search finished the job.
    pub exact: bool,
}

impl HourTable {
    pub fn new(tables: Vec<Vec<Level>>) -> Self {
        let mut levels = Vec::with_capacity(tables.len());
        let mut order = Vec::with_capacity(tables.len());
        for t in tables {
            let mut idx: Vec<usize> = (0..t.len()).collect();
            idx.sort_by(|&a, &b| t[a].cost.total_cmp(&t[b].cost).then(a.cmp(&b)));
            levels.push(idx.iter().map(|&i| t[i]).collect::<Vec<_>>());
            order.push(idx);
        }
        let n = levels.len();
        let mut suffix_max = vec![[0.0; 4]; n + 1];
        let mut suffix_min_cost = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let mut m = [f64::NEG_INFINITY; 4];
            for l in &levels[k] {
                for (mr, c) in m.iter_mut().zip(contrib(l)) {
                    *mr = mr.max(c);
                }
            }
            for r in 0..4 {
                suffix_max[k][r] = suffix_max[k + 1][r] + m[r];
            }
            let c = levels[k].first().map_or(f64::INFINITY, |l| l.cost);
            suffix_min_cost[k] = suffix_min_cost[k + 1] + c;
        }
        HourTable {
            levels,
            order,
            suffix_max,
            suffix_min_cost,
        }
    }

    pub fn devices(&self) -> usize {
        self.levels.len()
    }

    /// First requirement row that cannot be met even with every device at
    /// its largest contribution, with the missing amount.
    pub fn shortfall(&self, req: &Req) -> Option<(usize, f64)> {
        (0..4)
            .map(|r| (r, req[r] - self.suffix_max[0][r]))
            .find(|&(_, gap)| gap > BALANCE_TOL)
    }

    fn covers(sums: &[f64; 4], req: &Req) -> bool {
        (0..4).all(|r| sums[r] >= req[r] - BALANCE_TOL)
    }

    fn eval(&self, sorted_pick: &[usize]) -> ([f64; 4], f64) {
        let mut s = [0.0; 4];
        let mut c = 0.0;
        for (k, &i) in sorted_pick.iter().enumerate() {
            let l = &self.levels[k][i];
            for (sr, v) in s.iter_mut().zip(contrib(l)) {
                *sr += v;
            }
            c += l.cost;
        }
        (s, c)
    }

    fn to_original(&self, sorted_pick: &[usize]) -> Vec<usize> {
        sorted_pick
            .iter()
            .enumerate()
            .map(|(k, &i)| self.order[k][i])
            .collect()
    }

    fn to_sorted(&self, pick: &[usize]) -> Option<Vec<usize>> {
        pick.iter()
            .enumerate()
            .map(|(k, &i)| self.order.get(k)?.iter().position(|&o| o == i))
            .collect()
    }

    /// Cheapest covering choice. `warm` is a pick in original indices used
    /// as the starting incumbent. Returns `None` when nothing covers `req`.
    pub fn solve(
        &self,
        req: &Req,
        warm: Option<&[usize]>,
        node_budget: usize,
    ) -> Option<HourChoice> {
        if self.shortfall(req).is_some() {
            return None;
        }
        let mut bb = Bb {
            t: self,
            req,
            best: f64::INFINITY,
            best_pick: None,
            cur: vec![0; self.devices()],
            nodes: 0,
            budget: node_budget,
            exhausted: false,
        };
        if let Some(w) = warm
            .filter(|w| w.len() == self.devices())
            .and_then(|w| self.to_sorted(w))
        {
            let (s, c) = self.eval(&w);
            if Self::covers(&s, req) {
                bb.best = c;
                bb.best_pick = Some(w);
            }
        }
        bb.dfs(0, [0.0; 4], 0.0);
        let exact = !bb.exhausted;
        let mut pick = match bb.best_pick {
            Some(p) => p,
            None => self.capacity_first(req)?,
        };
        if !exact {
            self.local_search(req, &mut pick);
        }
        let (_, cost) = self.eval(&pick);
        Some(HourChoice {
            pick: self.to_original(&pick),
            cost,
            exact,
        })
    }

    /// Depth-first search preferring large contributions, used to find any
    /// covering choice when the cost-ordered search ran out of nodes.
    fn capacity_first(&self, req: &Req) -> Option<Vec<usize>> {
        let n = self.devices();
        let orders: Vec<Vec<usize>> = (0..n)
            .map(|k| {
                let mut idx: Vec<usize> = (0..self.levels[k].len()).collect();
                let score = |i: usize| {
                    let c = contrib(&self.levels[k][i]);
                    c[0] + c[1] + 100.0 * (c[2] + c[3])
                };
                idx.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
                idx
            })
            .collect();
        let mut cur = vec![0; n];
        fn go(
            t: &HourTable,
            req: &Req,
            orders: &[Vec<usize>],
            k: usize,
            sums: [f64; 4],
            cur: &mut [usize],
        ) -> bool {
            if k == t.devices() {
                return HourTable::covers(&sums, req);
            }
            for &i in &orders[k] {
                let c = contrib(&t.levels[k][i]);
                let mut s = sums;
                let mut ok = true;
                for r in 0..4 {
                    s[r] += c[r];
                    if s[r] + t.suffix_max[k + 1][r] < req[r] - BALANCE_TOL {
                        ok = false;
                    }
                }
                if ok {
                    cur[k] = i;
                    if go(t, req, orders, k + 1, s, cur) {
                        return true;
                    }
                }
            }
            false
        }
        go(self, req, &orders, 0, [0.0; 4], &mut cur).then_some(cur)
    }

    /// Single and pairwise level changes until no move lowers the cost.
    fn local_search(&self, req: &Req, pick: &mut [usize]) {
        let n = self.devices();
        let (_, mut cost) = self.eval(pick);
        loop {
            let mut improved = false;
            for a in 0..n {
                for ia in 0..self.levels[a].len() {
                    let old = pick[a];
                    pick[a] = ia;
                    let (s, c) = self.eval(pick);
                    if c < cost - 1e-12 && Self::covers(&s, req) {
                        cost = c;
                        improved = true;
                    } else {
                        pick[a] = old;
                    }
                }
            }
            if !improved {
                for a in 0..n {
                    for b in a + 1..n {
                        for ia in 0..self.levels[a].len() {
                            for ib in 0..self.levels[b].len() {
                                let (oa, ob) = (pick[a], pick[b]);
                                pick[a] = ia;
                                pick[b] = ib;
                                let (s, c) = self.eval(pick);
                                if c < cost - 1e-12 && Self::covers(&s, req) {
                                    cost = c;
                                    improved = true;
                                } else {
                                    pick[a] = oa;
                                    pick[b] = ob;
                                }
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
}

struct Bb<'a> {
    t: &'a HourTable,
    req: &'a Req,
    best: f64,
    best_pick: Option<Vec<usize>>,
    cur: Vec<usize>,
    nodes: usize,
    budget: usize,
    exhausted: bool,
}

impl Bb<'_> {
    fn dfs(&mut self, k: usize, sums: [f64; 4], cost: f64) {
        let t = self.t;
        if k == t.devices() {
            if HourTable::covers(&sums, self.req) && cost < self.best {
                self.best = cost;
                self.best_pick = Some(self.cur.clone());
            }
            return;
        }
        let rest = t.suffix_min_cost[k + 1];
        for i in 0..t.levels[k].len() {
            let l = &t.levels[k][i];
            if cost + l.cost + rest >= self.best {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            let c = contrib(l);
            let mut s = sums;
            let mut reachable = true;
            for r in 0..4 {
                s[r] += c[r];
                if s[r] + t.suffix_max[k + 1][r] < self.req[r] - BALANCE_TOL {
                    reachable = false;
                }
            }
            if reachable {
                self.cur[k] = i;
                self.dfs(k + 1, s, cost + l.cost);
                if self.exhausted {
                    return;
                }
            }
        }
    }
}
