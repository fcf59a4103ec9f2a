//! The bundled buying-books corpus and a few deliberate mutations of it.

use crate::dsl::{instantiate, InstantiateError, LoadError, Program};
use crate::term::{Configuration, Fragment};

pub const USER_AGENT: &str = include_str!("../corpus/user_agent.abwscl");
pub const BOOK_STORE: &str = include_str!("../corpus/book_store.abwscl");
pub const BUYING_BOOKS_WSC: &str = include_str!("../corpus/buying_books_wsc.abwscl");

/// `(file name, contents)` for every corpus file.
pub const FILES: [(&str, &str); 3] = [
    ("user_agent.abwscl", USER_AGENT),
    ("book_store.abwscl", BOOK_STORE),
    ("buying_books_wsc.abwscl", BUYING_BOOKS_WSC),
];

pub const ENTRY: &str = "BuyingBookWSC";

pub fn program() -> Program {
    Program::from_sources(FILES).expect("bundled corpus is valid")
}

/// The book store with SendPBAA's forwarding send removed, so the price
/// never reaches the orchestration.
pub fn book_store_without_price() -> String {
    let sendpb = BOOK_STORE.find("AA SendPBAA").expect("SendPBAA present");
    let line = "        wso-ref <- receivePB(prices)\n";
    let at = sendpb + BOOK_STORE[sendpb..].find(line).expect("SendPBAA send present");
    format!("{}{}", &BOOK_STORE[..at], &BOOK_STORE[at + line.len()..])
}

/// The user agent with RequstLBAA trying to create an actor.
pub fn user_agent_with_creating_aa() -> String {
    USER_AGENT.replacen(
        "        wso-ref <- requestLB()\n",
        "        wso-ref <- requestLB()\n        wso-ref := new UserAgentWSO(self)\n",
        1,
    )
}

/// The book store with the WS's setPartner method removed.
pub fn book_store_without_set_partner() -> String {
    BOOK_STORE.replacen("    setPartner(WS ws) if true {\n        ws-ref := ws\n    }\n", "", 1)
}

pub fn program_with(user_agent: &str, book_store: &str) -> Result<Program, LoadError> {
    Program::from_sources([
        ("user_agent.abwscl", user_agent),
        ("book_store.abwscl", book_store),
        ("buying_books_wsc.abwscl", BUYING_BOOKS_WSC),
    ])
}

/// A closed configuration holding one freshly instantiated `entry` actor.
pub fn initial_configuration(program: &Program, entry: &str) -> Result<Option<Configuration>, InstantiateError> {
    let Some(def) = program.get(entry) else { return Ok(None) };
    let mut c = Configuration::empty();
    let actor = instantiate(def, &[], &mut c)?;
    let mut top = Fragment::empty().with_actor(actor);
    top.restriction = None;
    c.top = top;
    Ok(Some(c))
}
