import { describe, expect, it } from "vitest"

import { discontinuousNodes, layoutTree } from "../src/layout.js"
import { Sentence, SentenceEnvelope, WireNode, WireToken } from "../src/types.js"

import baeckerEnvelope from "./fixtures/sentence_baecker.json"
import collisionEnvelope from "./fixtures/sentence_collision.json"
import extrapositionEnvelope from "./fixtures/sentence_extraposition.json"
import singleNodeEnvelope from "./fixtures/sentence_single_node.json"
import unattachedEnvelope from "./fixtures/sentence_unattached.json"

const wire = (envelope: unknown): Sentence => (envelope as SentenceEnvelope).sentence

const baecker = wire(baeckerEnvelope)
const collision = wire(collisionEnvelope)
const extraposition = wire(extrapositionEnvelope)
const singleNode = wire(singleNodeEnvelope)
const unattached = wire(unattachedEnvelope)
const fixtures = { baecker, collision, extraposition, singleNode, unattached }

const tok = (position: number, parent: number | null = null, label = "--"): WireToken => ({
  position,
  form: `w${position}`,
  pos: "XX",
  reliable: true,
  parent,
  label,
})

const nt = (id: number, parent: number | null = null, label = "--"): WireNode => ({
  id,
  category: "NP",
  parent,
  label,
})

const sentence = (tokens: WireToken[], nodes: WireNode[] = []): Sentence => ({
  id: "synthetic",
  comment: null,
  tokens,
  nodes,
  discontinuous: [],
})

const at = (layout: ReturnType<typeof layoutTree>, id: number) => {
  const found = layout.nodes.find(node => node.id === id)
  if (found === undefined) throw new Error(`no layout node ${id}`)
  return found
}

const crossings = (layout: ReturnType<typeof layoutTree>) =>
  layout.edges.filter(e => e.crossing).map(e => [e.parent, e.child])

describe("terminals", () => {
  it("sit on the baseline at their token position", () => {
    for (const fixture of Object.values(fixtures)) {
      const layout = layoutTree(fixture)
      for (const token of fixture.tokens) {
        const placed = at(layout, token.position)
        expect(placed.kind).toBe("token")
        expect(placed.x).toBe(token.position)
        expect(placed.level).toBe(0)
      }
      expect(layout.width).toBe(fixture.tokens.length)
    }
  })
})

describe("verb phrase fronting fixture", () => {
  const layout = layoutTree(baecker)

  it("centres each phrase over its children, one level above the tallest", () => {
    const vp = at(layout, 500)
    const s = at(layout, 501)
    expect(vp.x).toBeCloseTo(7 / 3, 10)
    expect(vp.level).toBe(1)
    expect(s.x).toBeCloseTo(16 / 9, 10)
    expect(s.level).toBe(2)
    expect(layout.height).toBe(3)
  })

  it("flags exactly the edge from the fronted phrase to its first token", () => {
    expect(crossings(layout)).toEqual([[500, 0]])
  })
})

describe("extraposed clause fixture", () => {
  const layout = layoutTree(extraposition)

  it("stacks the phrase chain at the expected slots", () => {
    expect(at(layout, 500)).toMatchObject({ x: 6, level: 1 })
    expect(at(layout, 501)).toMatchObject({ x: 3, level: 2 })
    expect(at(layout, 502)).toMatchObject({ x: 3, level: 3 })
    expect(at(layout, 503).x).toBeCloseTo(7 / 3, 10)
    expect(at(layout, 503).level).toBe(4)
    expect(layout.height).toBe(5)
  })

  it("flags every edge that spans tokens outside its phrase", () => {
    const flagged = crossings(layout)
    flagged.sort((a, b) => a[0] - b[0] || a[1] - b[1])
    expect(flagged).toEqual([
      [501, 0],
      [501, 500],
      [502, 2],
      [502, 4],
      [502, 501],
    ])
  })
})

describe("crossing flags", () => {
  it("implicate exactly the discontinuous nodes on every fixture", () => {
    for (const fixture of Object.values(fixtures)) {
      const layout = layoutTree(fixture)
      const flaggedParents = [...new Set(layout.edges.filter(e => e.crossing).map(e => e.parent))]
      flaggedParents.sort((a, b) => a - b)
      expect(flaggedParents).toEqual(fixture.discontinuous)
      expect(discontinuousNodes(fixture)).toEqual(fixture.discontinuous)
    }
  })

  it("never appear in a tree with a single covering node", () => {
    const layout = layoutTree(singleNode)
    expect(crossings(layout)).toEqual([])
    expect(at(layout, 500)).toMatchObject({ x: 1, level: 1 })
    expect(layout.height).toBe(2)
  })
})

describe("unattached sentence", () => {
  it("lays out tokens only, with no edges", () => {
    const layout = layoutTree(unattached)
    expect(layout.edges).toEqual([])
    expect(layout.nodes).toHaveLength(3)
    expect(layout.height).toBe(1)
  })
})

describe("coinciding centres", () => {
  it("are separated within a level, keeping all placements distinct", () => {
    const layout = layoutTree(collision)
    expect(at(layout, 500)).toMatchObject({ x: 1, level: 1 })
    expect(at(layout, 501)).toMatchObject({ x: 1.5, level: 1 })
    for (const fixture of Object.values(fixtures)) {
      const placed = layoutTree(fixture).nodes.map(node => `${node.x}/${node.level}`)
      expect(new Set(placed).size).toBe(placed.length)
    }
  })
})

describe("determinism", () => {
  it("produces identical layouts on repeated calls", () => {
    const copy = structuredClone(extraposition)
    expect(layoutTree(extraposition)).toEqual(layoutTree(extraposition))
    expect(extraposition).toEqual(copy)
  })
})

describe("invalid graphs", () => {
  it("rejects an empty sentence", () => {
    expect(() => layoutTree(sentence([]))).toThrow("sentence has no tokens")
  })

  it("rejects gapped token positions", () => {
    expect(() => layoutTree(sentence([tok(0), tok(2)]))).toThrow(
      "token positions must cover 0..n-1 exactly once",
    )
  })

  it("rejects a node id that collides with a token", () => {
    expect(() => layoutTree(sentence([tok(0)], [nt(0)]))).toThrow("duplicate node id 0")
  })

  it("rejects an edge to an unknown parent", () => {
    expect(() => layoutTree(sentence([tok(0, 999)]))).toThrow("unknown parent 999 of 0")
  })

  it("rejects a parent cycle", () => {
    const cyclic = sentence([tok(0, 500)], [nt(500, 501), nt(501, 500)])
    expect(() => layoutTree(cyclic)).toThrow(/cycle through node/)
  })

  it("rejects a childless nonterminal", () => {
    expect(() => layoutTree(sentence([tok(0)], [nt(500)]))).toThrow(
      "nonterminal 500 has no children",
    )
  })
})
