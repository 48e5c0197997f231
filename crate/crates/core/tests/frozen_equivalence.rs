//! Q-learning on a fixed dyadic grid is the same learner whether it is expressed as a
//! frozen adaptive partition or as a flat table.

use adarl::agent::Agent;
use adarl::envs::{EnvOutcome, Environment, OilConfig, OilEnv, Survey, TransitionNoise};
use adarl::{play_episode, AdaQlAgent, AdaQlConfig, EpsNet, EpsQlAgent, MetricSpec, Point};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Oil with a start state away from every dyadic boundary.
struct OffCenterStart(OilEnv);

impl Environment<f64> for OffCenterStart {
    fn id(&self) -> String {
        Environment::<f64>::id(&self.0)
    }

    fn spec(&self) -> MetricSpec {
        Environment::<f64>::spec(&self.0)
    }

    fn horizon(&self) -> usize {
        Environment::<f64>::horizon(&self.0)
    }

    fn reset(&self, _rng: &mut dyn RngCore) -> Point<f64> {
        Point::new(vec![0.3]).unwrap()
    }

    fn step(
        &self,
        h: usize,
        x: &Point<f64>,
        a: &Point<f64>,
        rng: &mut dyn RngCore,
    ) -> EnvOutcome<f64> {
        self.0.step(h, x, a, rng)
    }
}

#[test]
fn eps_ql_matches_frozen_adaql() {
    let mut oil = OilConfig::new(1, 4, Survey::Laplace);
    oil.transition = TransitionNoise::Coupled;
    oil.alpha = 0.1;
    let env = OffCenterStart(OilEnv::new(oil).unwrap());
    let spec = env.spec();

    for depth in 1..=4u32 {
        let mut cfg = AdaQlConfig::<f64>::new(env.horizon(), 400);
        cfg.bonus_scale = 0.02;
        cfg.lipschitz = 0.3;
        let mut frozen = AdaQlAgent::frozen_at_depth(spec, cfg, depth).unwrap();
        // the table learner's bias is L·pitch against 2·L·diam for a dyadic ball
        let mut table_cfg = cfg;
        table_cfg.lipschitz = 2.0 * cfg.lipschitz;
        let net = EpsNet::new(0.5f64.powi(depth as i32)).unwrap();
        let mut table = EpsQlAgent::new(spec, net, table_cfg).unwrap();

        let (mut rng_a, mut rng_b) = (ChaCha8Rng::seed_from_u64(9), ChaCha8Rng::seed_from_u64(9));
        let mut agent_rng = ChaCha8Rng::seed_from_u64(0);
        for episode in 0..400 {
            let a = play_episode(&env, &mut frozen, &mut rng_a, &mut agent_rng).unwrap();
            let b = play_episode(&env, &mut table, &mut rng_b, &mut agent_rng).unwrap();
            assert_eq!(a.rewards, b.rewards, "depth {depth}, episode {episode}");
        }
        assert_eq!(frozen.node_count(), table.node_count());

        for h in 1..=env.horizon() {
            let part = frozen.partition(h);
            for id in part.leaves() {
                let node = part.node(id);
                assert_eq!(node.level(), depth);
                let got = table.q_value(h, &node.s_cell.index, &node.a_cell.index);
                assert!(
                    (node.qhat - got).abs() < 1e-12,
                    "h={h}: {} vs {got}",
                    node.qhat
                );
            }
        }
    }
}
