import { describe, expect, it } from "vitest"

import { AnnotationState } from "../src/selection.js"
import { IncrementEnvelope, SentenceEnvelope } from "../src/types.js"

import incrementJson from "./fixtures/increment_proposal.json"
import baeckerJson from "./fixtures/sentence_baecker.json"
import unattachedJson from "./fixtures/sentence_unattached.json"

const unattached = unattachedJson as unknown as SentenceEnvelope
const increment = incrementJson as unknown as IncrementEnvelope

// Fresh state with the flat three-token sentence loaded and the first
// two tokens selected, matching what the increment fixture was asked.
const selectedState = (): AnnotationState => {
  const state = new AnnotationState()
  state.setSentence(structuredClone(unattached))
  state.selectTokenRange(0, 1)
  return state
}

const proposedState = (): AnnotationState => {
  const state = selectedState()
  state.setProposal(structuredClone(increment))
  return state
}

describe("selection", () => {
  it("toggles displayed ids and rejects unknown ones", () => {
    const state = selectedState()
    state.toggle(1)
    expect(state.selected).toEqual([0])
    state.toggle(2)
    expect(state.selected).toEqual([0, 2])
    expect(() => state.toggle(999)).toThrow("node 999 is not displayed")
  })

  it("selects token ranges in either direction, within bounds", () => {
    const state = selectedState()
    state.selectTokenRange(2, 0)
    expect(state.selected).toEqual([0, 1, 2])
    expect(() => state.selectTokenRange(0, 3)).toThrow("token range 0..3 is out of bounds")
  })

  it("withdraws a pending proposal when the selection changes", () => {
    const state = proposedState()
    state.toggle(2)
    expect(state.pending).toBeNull()
  })

  it("survives a reload that still displays everything it refers to", () => {
    const state = proposedState()
    state.setSentence(structuredClone(unattached))
    expect(state.selected).toEqual([0, 1])
    expect(state.pending).not.toBeNull()
  })

  it("drops what a reload no longer displays", () => {
    const state = proposedState()
    const shrunk = structuredClone(unattached)
    shrunk.sentence.tokens = shrunk.sentence.tokens.slice(0, 1)
    state.setSentence(shrunk)
    expect(state.selected).toEqual([0])
    expect(state.pending).toBeNull()
  })
})

describe("proposals", () => {
  it("must match the current selection", () => {
    const state = selectedState()
    state.selectTokenRange(0, 2)
    expect(() => state.setProposal(structuredClone(increment))).toThrow(
      "proposal does not match the selection",
    )
  })

  it("must refer to displayed nodes only", () => {
    const state = selectedState()
    const foreign = structuredClone(increment)
    foreign.proposal.selected = [0, 999]
    expect(() => state.setProposal(foreign)).toThrow(
      "proposal refers to 999 which is not displayed",
    )
  })

  it("highlights exactly the unreliable labels", () => {
    const state = proposedState()
    expect(state.highlight()).toEqual([1])
    expect(state.categoryUnreliable()).toBe(false)
  })
})

describe("the accept guard", () => {
  it("blocks while an unreliable label is unconfirmed", () => {
    const state = proposedState()
    expect(state.canAccept()).toBe(false)
    expect(state.blockers()).toEqual(["label for node 1 is unconfirmed"])
    expect(() => state.acceptEdit()).toThrow("cannot accept: label for node 1 is unconfirmed")
  })

  it("only confirms labels that are actually unreliable", () => {
    const state = proposedState()
    expect(() => state.confirmLabel(0)).toThrow("node 0 has no unreliable label to confirm")
  })

  it("opens after the unreliable label is confirmed", () => {
    const state = proposedState()
    state.confirmLabel(1)
    expect(state.canAccept()).toBe(true)
    expect(state.acceptEdit()).toEqual({
      kind: "group",
      selected: [0, 1],
      category: "NP",
      labels: { "0": "NK", "1": "SB" },
    })
  })

  it("treats an override as confirmation", () => {
    const state = proposedState()
    state.overrideLabel(1, "NK")
    expect(state.canAccept()).toBe(true)
    expect(state.acceptEdit().labels).toEqual({ "0": "NK", "1": "NK" })
    expect(() => state.overrideLabel(7, "NK")).toThrow("node 7 is not part of the proposal")
  })

  it("blocks on an unreliable category until confirmed or overridden", () => {
    const hedged = structuredClone(increment)
    hedged.proposal.category_reliable = false
    const state = selectedState()
    state.setProposal(hedged)
    state.confirmLabel(1)
    expect(state.blockers()).toEqual(["category is unconfirmed"])
    state.confirmCategory()
    expect(state.canAccept()).toBe(true)

    const other = selectedState()
    other.setProposal(structuredClone(hedged))
    other.confirmLabel(1)
    other.overrideCategory("PP")
    expect(other.acceptEdit().category).toBe("PP")
  })

  it("blocks when the service proposed no category at all", () => {
    const bare = structuredClone(increment)
    bare.proposal.category = null
    bare.proposal.category_reliable = null
    const state = selectedState()
    state.setProposal(bare)
    state.confirmLabel(1)
    expect(state.blockers()).toEqual(["no category"])
    state.overrideCategory("NP")
    expect(state.canAccept()).toBe(true)
  })

  it("blocks when a selected node has no proposed label", () => {
    const partial = structuredClone(increment)
    partial.proposal.labels = [{ node: 0, label: "NK", reliable: true }]
    const state = selectedState()
    state.setProposal(partial)
    expect(state.blockers()).toEqual(["node 1 has no label"])
    state.overrideLabel(1, "SB")
    expect(state.canAccept()).toBe(true)
  })
})

describe("label cycling", () => {
  it("draws its pool from the sentence and the proposal, root edges excluded", () => {
    const state = proposedState()
    expect(state.labelPool()).toEqual(["NK", "SB"])

    const attached = new AnnotationState()
    attached.setSentence(structuredClone(baeckerJson) as unknown as SentenceEnvelope)
    expect(attached.labelPool()).toEqual(["HD", "MO", "OC", "PD", "SB"])
  })

  it("steps through the pool and counts as an override", () => {
    const state = proposedState()
    state.cycleLabel(1, 1)
    expect(state.pending?.overrides.get(1)).toBe("NK")
    expect(state.canAccept()).toBe(true)
    state.cycleLabel(1, 1)
    expect(state.pending?.overrides.get(1)).toBe("SB")
    state.cycleLabel(1, -1)
    expect(state.pending?.overrides.get(1)).toBe("NK")
    expect(() => state.cycleLabel(7, 1)).toThrow("node 7 is not part of the proposal")
  })
})

describe("service failures", () => {
  it("set a banner and keep selection and proposal intact", () => {
    const state = proposedState()
    state.conflict("sentence '4' is at version 3, edit was computed against 0")
    expect(state.error).toMatch("version 3")
    expect(state.selected).toEqual([0, 1])
    expect(state.pending).not.toBeNull()
  })

  it("are cleared once an edit is applied", () => {
    const state = proposedState()
    state.conflict("boom")
    const next = structuredClone(unattached)
    next.version = 4
    state.applied(next)
    expect(state.error).toBeNull()
    expect(state.selected).toEqual([])
    expect(state.pending).toBeNull()
    expect(state.version).toBe(4)
  })

  it("rejecting a proposal clears it and the banner", () => {
    const state = proposedState()
    state.conflict("boom")
    state.reject()
    expect(state.pending).toBeNull()
    expect(state.error).toBeNull()
    expect(state.selected).toEqual([0, 1])
  })
})
