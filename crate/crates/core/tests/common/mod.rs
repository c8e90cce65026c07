#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pipeplan::{tags, Edge, Group, Image, ImageCatalog, Instance, Operator, Pipeline};

const TAG_POOL: [&str; 4] = ["t0", "t1", "t2", "t3"];

fn subset(rng: &mut ChaCha8Rng, from: &[&str]) -> Vec<String> {
    loop {
        let picked: Vec<String> = from
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|t| t.to_string())
            .collect();
        if !picked.is_empty() {
            return picked;
        }
    }
}

/// Random satisfiable instance: 1..=max_ops operators, 1..=max_images
/// images, forward edges with probability 0.3 and, sometimes, one
/// pre-assigned group.
pub fn random_instance(seed: u64, max_ops: usize, max_images: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_ops);
    let k = rng.gen_range(1..=max_images);
    let image_tags: Vec<Vec<String>> = (0..k).map(|_| subset(&mut rng, &TAG_POOL)).collect();
    let images = image_tags
        .iter()
        .enumerate()
        .map(|(i, t)| Image::new(format!("img{i}"), tags(t.iter().map(String::as_str))))
        .collect();

    let mut host = Vec::new();
    let ops = (0..n)
        .map(|o| {
            let i = rng.gen_range(0..k);
            host.push(i);
            let pool: Vec<&str> = image_tags[i].iter().map(String::as_str).collect();
            let t = subset(&mut rng, &pool);
            Operator::new(format!("op{o}"), "go", tags(t.iter().map(String::as_str)))
        })
        .collect();

    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.3) {
                edges.push(Edge::new(format!("op{a}"), format!("op{b}")));
            }
        }
    }

    let mut groups = Vec::new();
    if n >= 2 && rng.gen_bool(0.2) {
        let img = host[rng.gen_range(0..n)];
        let mut members: Vec<usize> = (0..n).filter(|&o| host[o] == img).collect();
        members.shuffle(&mut rng);
        members.truncate(2);
        members.sort_unstable();
        let ids = members.iter().map(|o| format!("op{o}")).collect();
        groups.push(Group::new("user-1", ids, format!("img{img}")));
    }

    Instance::new(
        Pipeline::new(ops, edges, groups).expect("valid random pipeline"),
        ImageCatalog::new(images).expect("valid random catalog"),
    )
}

/// Number of calls made by the naive recursive Fibonacci, by running it.
pub fn naive_fib_calls(n: u32) -> u64 {
    fn fib(n: u32, calls: &mut u64) -> u64 {
        *calls += 1;
        if n < 2 {
            n as u64
        } else {
            fib(n - 1, calls) + fib(n - 2, calls)
        }
    }
    let mut calls = 0;
    fib(n, &mut calls);
    calls
}
