import { Api, SummaryResponse } from './api';

// View state for the aspect explorer. The displayed summary always
// comes from the last service response; the toggle set only drives
// which request is issued next.
export interface ViewState {
  entityId: string | null;
  selection: ReadonlySet<string>;
  response: SummaryResponse | null;
  inFlight: boolean;
  message: string | null;
}

export type Listener = (state: ViewState) => void;

export const EMPTY_SELECTION_MESSAGE = 'select at least one aspect';

export class SummaryStore {
  private entityId: string | null = null;
  private selection = new Set<string>();
  private response: SummaryResponse | null = null;
  private inFlight = false;
  // at most one refresh is queued while a request is in flight;
  // rapid toggles coalesce into the trailing request
  private pendingRefresh = false;
  private message: string | null = null;

  constructor(
    private api: Api,
    private listener: Listener = () => {},
  ) {}

  get state(): ViewState {
    return {
      entityId: this.entityId,
      selection: new Set(this.selection),
      response: this.response,
      inFlight: this.inFlight,
      message: this.message,
    };
  }

  /** Selected aspect names in canonical order; toggle order never matters. */
  sortedSelection(): string[] {
    return [...this.selection].sort();
  }

  selectEntity(entityId: string): Promise<void> {
    this.entityId = entityId;
    this.response = null;
    return this.refresh();
  }

  toggle(aspect: string): Promise<void> {
    if (this.selection.has(aspect)) {
      this.selection.delete(aspect);
    } else {
      this.selection.add(aspect);
    }
    return this.refresh();
  }

  setSelection(aspects: Iterable<string>): Promise<void> {
    this.selection = new Set(aspects);
    return this.refresh();
  }

  private emit(): void {
    this.listener(this.state);
  }

  private async refresh(): Promise<void> {
    if (this.entityId === null) {
      this.message = 'select an entity';
      this.emit();
      return;
    }
    if (this.inFlight) {
      // settle first; the trailing rerun re-reads the selection, so an
      // emptied set still ends on the empty-selection message
      this.pendingRefresh = true;
      return;
    }
    if (this.selection.size === 0) {
      this.response = null;
      this.message = EMPTY_SELECTION_MESSAGE;
      this.emit();
      return;
    }
    this.inFlight = true;
    this.message = null;
    this.emit();
    try {
      this.response = await this.api.summarize(
        this.entityId,
        this.sortedSelection(),
      );
      this.message = null;
    } catch (err) {
      this.response = null;
      this.message = err instanceof Error ? err.message : String(err);
    }
    this.inFlight = false;
    const rerun = this.pendingRefresh;
    this.pendingRefresh = false;
    this.emit();
    if (rerun) {
      await this.refresh();
    }
  }
}
