// Tree geometry for syntax graphs, in slot units: terminal i sits at
// x = i on the baseline and a nonterminal sits one level above its
// tallest child, centred on the mean x of its children. An edge is
// flagged as crossing when some token outside its parent's yield falls
// inside the closed horizontal strip the edge spans. Edges of
// continuous constituents can never be flagged, so the flags mark
// exactly where discontinuity shows up in the drawing. Everything here
// is pure data; rendering scales it later.

import { Sentence } from "./types.js"

export interface LayoutNode {
  id: number
  kind: "token" | "node"
  x: number
  level: number
  text: string
  pos: string | null
}

export interface LayoutEdge {
  parent: number
  child: number
  label: string
  crossing: boolean
}

export interface TreeLayout {
  nodes: LayoutNode[]
  edges: LayoutEdge[]
  width: number
  height: number
}

// Same-level nodes whose child means coincide are pushed apart by half
// a slot so no two of them land on one point.
const MIN_SEPARATION = 0.5

interface Analysis {
  children: Map<number, number[]>
  yields: Map<number, number[]>
  levels: Map<number, number>
}

function analyze(sentence: Sentence): Analysis {
  const tokens = sentence.tokens
  if (tokens.length === 0) {
    throw new Error("sentence has no tokens")
  }
  const tokenIds = new Set(tokens.map(t => t.position))
  if (tokenIds.size !== tokens.length || tokens.some(t => t.position < 0 || t.position >= tokens.length)) {
    throw new Error("token positions must cover 0..n-1 exactly once")
  }
  const known = new Set(tokenIds)
  for (const node of sentence.nodes) {
    if (known.has(node.id)) {
      throw new Error(`duplicate node id ${node.id}`)
    }
    known.add(node.id)
  }

  const children = new Map<number, number[]>()
  const attach = (child: number, parent: number) => {
    if (!known.has(parent)) {
      throw new Error(`unknown parent ${parent} of ${child}`)
    }
    const siblings = children.get(parent)
    if (siblings === undefined) children.set(parent, [child])
    else siblings.push(child)
  }
  for (const token of tokens) {
    if (token.parent !== null) attach(token.position, token.parent)
  }
  for (const node of sentence.nodes) {
    if (node.parent !== null) attach(node.id, node.parent)
  }

  const yields = new Map<number, number[]>()
  const levels = new Map<number, number>()
  for (const token of tokens) {
    yields.set(token.position, [token.position])
    levels.set(token.position, 0)
  }
  const visiting = new Set<number>()
  const measure = (id: number): void => {
    if (yields.has(id)) return
    if (visiting.has(id)) {
      throw new Error(`cycle through node ${id}`)
    }
    visiting.add(id)
    const kids = children.get(id) ?? []
    if (kids.length === 0) {
      throw new Error(`nonterminal ${id} has no children`)
    }
    const covered: number[] = []
    let level = 0
    for (const kid of kids) {
      measure(kid)
      covered.push(...yields.get(kid)!)
      level = Math.max(level, levels.get(kid)!)
    }
    covered.sort((a, b) => a - b)
    yields.set(id, covered)
    levels.set(id, level + 1)
    visiting.delete(id)
  }
  for (const node of sentence.nodes) {
    measure(node.id)
  }
  return { children, yields, levels }
}

export function layoutTree(sentence: Sentence): TreeLayout {
  const { children, yields, levels } = analyze(sentence)

  const x = new Map<number, number>()
  for (const token of sentence.tokens) {
    x.set(token.position, token.position)
  }
  const byLevel = new Map<number, number[]>()
  for (const node of sentence.nodes) {
    const level = levels.get(node.id)!
    const group = byLevel.get(level)
    if (group === undefined) byLevel.set(level, [node.id])
    else group.push(node.id)
  }
  for (const level of [...byLevel.keys()].sort((a, b) => a - b)) {
    const group = byLevel.get(level)!
    for (const id of group) {
      const kids = children.get(id)!
      x.set(id, kids.reduce((sum, kid) => sum + x.get(kid)!, 0) / kids.length)
    }
    group.sort((a, b) => x.get(a)! - x.get(b)! || a - b)
    let previous = -Infinity
    for (const id of group) {
      const nudged = Math.max(x.get(id)!, previous + MIN_SEPARATION)
      x.set(id, nudged)
      previous = nudged
    }
  }

  const yieldSets = new Map<number, Set<number>>()
  const crossing = (parent: number, child: number): boolean => {
    let covered = yieldSets.get(parent)
    if (covered === undefined) {
      covered = new Set(yields.get(parent)!)
      yieldSets.set(parent, covered)
    }
    const lo = Math.min(x.get(parent)!, x.get(child)!)
    const hi = Math.max(x.get(parent)!, x.get(child)!)
    for (let q = Math.ceil(lo); q <= Math.floor(hi); q++) {
      if (!covered.has(q)) return true
    }
    return false
  }

  const nodes: LayoutNode[] = []
  const edges: LayoutEdge[] = []
  for (const token of sentence.tokens) {
    nodes.push({
      id: token.position,
      kind: "token",
      x: token.position,
      level: 0,
      text: token.form,
      pos: token.pos,
    })
    if (token.parent !== null) {
      edges.push({
        parent: token.parent,
        child: token.position,
        label: token.label,
        crossing: crossing(token.parent, token.position),
      })
    }
  }
  for (const node of sentence.nodes) {
    nodes.push({
      id: node.id,
      kind: "node",
      x: x.get(node.id)!,
      level: levels.get(node.id)!,
      text: node.category,
      pos: null,
    })
    if (node.parent !== null) {
      edges.push({
        parent: node.parent,
        child: node.id,
        label: node.label,
        crossing: crossing(node.parent, node.id),
      })
    }
  }

  let height = 1
  for (const level of levels.values()) {
    height = Math.max(height, level + 1)
  }
  return { nodes, edges, width: sentence.tokens.length, height }
}

// Local recomputation of what the server sends as `discontinuous`:
// a nonterminal is discontinuous when its yield breaks into more than
// one run of consecutive positions.
export function discontinuousNodes(sentence: Sentence): number[] {
  const { yields } = analyze(sentence)
  const result: number[] = []
  for (const node of sentence.nodes) {
    const covered = yields.get(node.id)!
    let blocks = 1
    for (let i = 1; i < covered.length; i++) {
      if (covered[i] !== covered[i - 1] + 1) blocks++
    }
    if (blocks > 1) result.push(node.id)
  }
  return result.sort((a, b) => a - b)
}
