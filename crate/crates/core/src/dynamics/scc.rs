//! Strongly connected components (iterative Tarjan) and terminal components.

/// Components in reverse topological order of the condensation (Tarjan's
/// natural output order). Each component lists its vertices ascending.
pub fn tarjan(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (vertex, next edge offset)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, edge)) = call.last() {
            if let Some(&w) = adjacency[v].get(edge) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                components.push(component);
            }
        }
    }
    components
}

/// Components with no edge leaving them, ordered by smallest member.
pub fn terminal_components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let components = tarjan(adjacency);
    let mut comp_of = vec![0; adjacency.len()];
    for (c, members) in components.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let mut terminal: Vec<Vec<usize>> = components
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|&v| adjacency[v].iter().all(|&w| comp_of[w] == *c))
        })
        .map(|(_, members)| members.clone())
        .collect();
    terminal.sort_by_key(|members| members[0]);
    terminal
}
