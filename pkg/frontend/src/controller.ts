// Survey flow state machine, independent of the DOM. The app layer renders
// whatever state this controller exposes; all transitions happen here so
// the in-flight guard and 409 handling are unit-testable.

import { Choice, NextPayload, fetchNext, isDone, submitChoice } from './api.js';

export type State =
  | { kind: 'loading' }
  | { kind: 'item'; payload: Extract<NextPayload, { item_id: string }> }
  | { kind: 'done'; answered: number }
  | { kind: 'error'; message: string };

export class SurveyController {
  state: State = { kind: 'loading' };
  private inFlight = false;

  constructor(
    private base: string,
    private participant: string,
    private onChange: (state: State) => void,
  ) {}

  private setState(state: State): void {
    this.state = state;
    this.onChange(state);
  }

  async load(): Promise<void> {
    this.setState({ kind: 'loading' });
    try {
      const payload = await fetchNext(this.base, this.participant);
      if (isDone(payload)) {
        this.setState({ kind: 'done', answered: payload.progress.answered });
      } else {
        this.setState({ kind: 'item', payload });
      }
    } catch (err) {
      this.setState({ kind: 'error', message: `Could not reach the survey server (${err}).` });
    }
  }

  // Submit the current item's choice. At most one submission is in flight:
  // further calls (double clicks) are ignored until it settles. A 409 from
  // the server means this answer already landed, so we advance either way.
  async submit(choice: Choice): Promise<void> {
    if (this.state.kind !== 'item' || this.inFlight) {
      return;
    }
    const itemId = this.state.payload.item_id;
    this.inFlight = true;
    try {
      await submitChoice(this.base, this.participant, itemId, choice);
    } catch (err) {
      this.setState({ kind: 'error', message: `Submission failed (${err}). Your progress is saved server-side; retry below.` });
      return;
    } finally {
      this.inFlight = false;
    }
    await this.load();
  }
}
