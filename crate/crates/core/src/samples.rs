//! Bundled sample databases: the four-entity song database and a set of
//! synthetic schemas generated deterministically from compact specs.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rusqlite::{params_from_iter, Connection};

use crate::db::quote_ident;

const SONG_SQL: &str = "
CREATE TABLE genre (g_name TEXT PRIMARY KEY, rating TEXT, most_popular_in TEXT);
CREATE TABLE artist (artist_name TEXT PRIMARY KEY, country TEXT, gender TEXT,
    preferred_genre TEXT REFERENCES genre(g_name));
CREATE TABLE files (f_id INTEGER PRIMARY KEY, artist_name TEXT REFERENCES artist(artist_name),
    file_size TEXT, duration TEXT, formats TEXT);
CREATE TABLE song (song_name TEXT PRIMARY KEY, artist_name TEXT REFERENCES artist(artist_name),
    country TEXT, f_id INTEGER REFERENCES files(f_id), genre_is TEXT REFERENCES genre(g_name),
    rating INTEGER, languages TEXT, releasedate DATE, resolution INTEGER);
INSERT INTO genre VALUES ('tagore', '8', 'Bangladesh'), ('nazrul', '7', 'Bangladesh'),
    ('folk', '9', 'Sylhet,Chittagong,Kustia'), ('modern', '8', 'Bangladesh'), ('blues', '7', 'Canada'),
    ('pop', '9', 'America');
INSERT INTO artist VALUES ('Shrikanta', 'India', 'Male', 'tagore'), ('Prity', 'Bangladesh', 'Female', 'nazrul'),
    ('Farida', 'Bangladesh', 'Female', 'folk'), ('Topu', 'India', 'Female', 'modern'),
    ('Enrique', 'USA', 'Male', 'blues'), ('Michel', 'UK', 'Male', 'pop');
INSERT INTO files VALUES (1, 'Shrikanta', '3.78 MB', '3:45', 'mp4'), (2, 'Prity', '4.12 MB', '2:56', 'mp3'),
    (3, 'Farida', '3.69 MB', '4:12', 'mp4'), (4, 'Enrique', '4.58 MB', '5:23', 'mp4'),
    (5, 'Michel', '5.10 MB', '4:34', 'mp3'), (6, 'Topu', '4.10 MB', '4:30', 'mp4');
INSERT INTO song VALUES
    ('Tumi robe nirobe', 'Shrikanta', 'India', 1, 'tagore', 8, 'bangla', '2006-03-28', 1080),
    ('Shukno patar nupur pae', 'Prity', 'Bangladesh', 2, 'nazrul', 5, 'bangla', '2012-12-21', 512),
    ('Ami opar hoye', 'Farida', 'Bangladesh', 3, 'folk', 7, 'bangla', '2011-05-13', 320),
    ('My love', 'Enrique', 'USA', 4, 'blues', 6, 'english', '2002-06-17', 1080),
    ('Just beat it', 'Michel', 'UK', 5, 'pop', 8, 'english', '1984-02-12', 1080),
    ('Aj ei akash', 'Topu', 'India', 6, 'modern', 10, 'bangla', '2004-01-30', 320),
    ('Bhalobashi', 'Farida', 'Bangladesh', 3, 'folk', 9, 'bangla', '2015-08-02', 720),
    ('Night drive', 'Enrique', 'USA', 4, 'blues', 4, 'english', '2018-10-09', 720);
";

/// Synthetic schemas. Each line under `db` declares a table: name, row
/// count, then `column kind` pairs separated by `;`. Kinds: `pk`,
/// `name(style)`, `cat(a|b)`, `int(lo,hi)`, `real(lo,hi)`, `date(y0,y1)`,
/// `bool`, `fk(table)`; a trailing `?` makes the column nullable.
const SPECS: &str = "
db library
publisher 15: id pk; name name(business); city name(place); founded int(1850,2015)
author 40: id pk; name name(person); country cat(USA|UK|France|India|Brazil|Japan); birth_year int(1900,1995)
book 120: id pk; title name(title); author_id fk(author); publisher_id fk(publisher); pages int(80,900); price real(5,60); published date(1950,2023); genre cat(fiction|mystery|history|science|poetry); in_print bool
loan 200: id pk; book_id fk(book); borrower cat(alice|bob|chen|dana|eli|fatima|gus); loan_date date(2018,2023); days int(1,60)?

db school
teacher 20: id pk; name name(person); hired date(1995,2023); salary int(35000,110000)
student 80: id pk; name name(person); grade_level int(9,12); gpa real(1.5,4); enrolled date(2015,2023); city cat(Springfield|Riverton|Lakeside|Hillview)
course 25: id pk; title name(subject); teacher_id fk(teacher); credits int(1,5); department cat(math|science|arts|languages|sports)
enrollment 240: id pk; student_id fk(student); course_id fk(course); score int(40,100)?; semester cat(fall|spring|summer)

db shop
supplier 12: id pk; name name(business); country cat(USA|China|Germany|Mexico|Vietnam); rating real(1,5)
customer 60: id pk; name name(person); segment cat(retail|wholesale|online); signup date(2015,2023); loyalty_points int(0,5000)
product 40: id pk; name name(product); supplier_id fk(supplier); category cat(toys|garden|kitchen|books|electronics); price real(2,400); discontinued bool
purchase 300: id pk; customer_id fk(customer); product_id fk(product); quantity int(1,12); purchased date(2019,2023); total real(5,2000)

db hospital
doctor 20: id pk; name name(person); specialty cat(cardiology|oncology|pediatrics|neurology|surgery); years_experience int(1,40)
patient 100: id pk; name name(person); age int(1,95); blood_type cat(A|B|AB|O); admitted date(2019,2023)
visit 250: id pk; doctor_id fk(doctor); patient_id fk(patient); visit_date date(2019,2023); cost real(50,3000); followup bool

db airline
airport 20: id pk; code name(code); city name(place); country cat(USA|Canada|Mexico|Germany|Japan); runways int(1,6)
flight 150: id pk; origin_id fk(airport); destination_id fk(airport); departure date(2021,2023); distance int(200,9000); delayed bool; fare real(49,1500)

db cinema
studio 12: id pk; name name(business); city name(place); founded int(1910,2015)
director 30: id pk; name name(person); nationality cat(American|French|Korean|Indian|Italian); debut_year int(1960,2015)
film 100: id pk; title name(title); director_id fk(director); studio_id fk(studio); release_date date(1970,2023); runtime int(70,200); budget real(0.5,250); genre cat(drama|comedy|horror|action|documentary)
review 260: id pk; film_id fk(film); critic cat(Ebert|Kael|Sarris|Dargis|Scott); stars int(1,5); published date(1975,2023)

db sports
team 16: id pk; name name(team); city name(place); founded int(1880,2010); league cat(north|south|east|west)
player 160: id pk; name name(person); team_id fk(team); position cat(guard|forward|center|keeper|defender); salary real(0.5,40); height int(160,215); retired bool
game 120: id pk; home_team_id fk(team); away_team_id fk(team); played date(2020,2023); home_score int(0,8); away_score int(0,8); attendance int(1000,80000)?

db realestate
agent 25: id pk; name name(person); agency cat(Prime|Keystone|Harbor|Summit); hired date(2005,2023)
property 150: id pk; address name(street); agent_id fk(agent); bedrooms int(1,6); area real(40,450); listed date(2018,2023); kind cat(condo|house|townhouse|loft); has_garden bool
sale 90: id pk; property_id fk(property); sale_date date(2019,2023); price real(80,2500); buyer name(person)

db restaurant
restaurant 40: id pk; name name(business); cuisine cat(italian|thai|mexican|indian|french|japanese); rating real(1,5); opened date(1990,2023)
dish 160: id pk; name name(dish); restaurant_id fk(restaurant); price real(3,80); vegetarian bool; calories int(150,1800)
inspection 120: id pk; restaurant_id fk(restaurant); inspected date(2018,2023); score int(50,100); passed bool

db company
office 6: id pk; city name(place); country cat(USA|UK|Germany|India|Japan); opened date(1990,2020)
department 10: id pk; name name(subject); office_id fk(office); budget real(0.1,20); floor int(1,30)
employee 120: id pk; name name(person); department_id fk(department); salary int(30000,250000); hired date(2000,2023); title cat(engineer|analyst|manager|designer|clerk); remote bool
project 40: id pk; name name(project); department_id fk(department); started date(2015,2023); cost real(10,900); status cat(active|paused|done)

db museum
exhibition 30: id pk; name name(title); opened date(2010,2023); visitors int(500,90000)
artist 40: id pk; name name(person); movement cat(baroque|impressionism|cubism|modern|realism); born int(1600,1990)
artwork 150: id pk; title name(title); artist_id fk(artist); exhibition_id fk(exhibition); year_made int(1620,2020); value real(0.1,120); medium cat(oil|watercolor|bronze|marble|ink); on_display bool

db rental
branch 12: id pk; name name(place); region cat(north|south|east|west|central); opened date(1995,2020)
car 90: id pk; plate name(code); branch_id fk(branch); make cat(Toyota|Ford|Honda|BMW|Kia|Tesla); year_built int(2008,2023); daily_rate real(20,250); electric bool
rental 260: id pk; car_id fk(car); start_date date(2021,2023); days int(1,30); total real(20,6000); customer name(person)

db conference
venue 12: id pk; name name(business); city name(place); capacity int(50,5000)
speaker 60: id pk; name name(person); affiliation cat(MIT|Stanford|Oxford|ETH|Tsinghua|Industry); h_index int(1,120)
talk 140: id pk; title name(title); speaker_id fk(speaker); venue_id fk(venue); scheduled date(2022,2024); minutes int(10,90); track cat(systems|theory|ml|security|hci)

db zoo
enclosure 20: id pk; name name(place); habitat cat(savanna|jungle|arctic|desert|aquatic); area real(100,9000)
keeper 25: id pk; name name(person); hired date(2000,2023); certified bool
animal 120: id pk; name name(pet); species cat(lion|penguin|otter|giraffe|zebra|tiger|seal); enclosure_id fk(enclosure); keeper_id fk(keeper); weight real(2,1500); born date(2000,2023)

db bank
branch 15: id pk; name name(place); city name(place); established int(1900,2015)
account 150: id pk; holder name(person); branch_id fk(branch); balance real(0,250000); opened date(2000,2023); kind cat(checking|savings|business); frozen bool
transfer 400: id pk; account_id fk(account); amount real(1,20000); made date(2021,2023); channel cat(online|atm|teller|mobile)

db gaming
player 80: id pk; handle name(handle); country cat(USA|Korea|Brazil|Sweden|China|Germany); joined date(2012,2023); level int(1,100)
game 20: id pk; title name(title); genre cat(rpg|shooter|puzzle|strategy|racing); released date(2000,2023); price real(0,70)
session 400: id pk; player_id fk(player); game_id fk(game); played date(2022,2023); minutes int(5,400); score int(0,100000)?

db weather
station 25: id pk; name name(place); elevation int(0,3500); region cat(coastal|mountain|plains|desert|forest)
reading 500: id pk; station_id fk(station); taken date(2022,2023); temperature real(-30,45); rainfall real(0,120)?; windy bool

db shipping
warehouse 15: id pk; name name(place); city name(place); capacity int(1000,90000)
carrier 10: id pk; name name(business); rating real(1,5); international bool
shipment 300: id pk; warehouse_id fk(warehouse); carrier_id fk(carrier); shipped date(2021,2023); weight real(0.1,900); cost real(5,4000); status cat(pending|transit|delivered|lost)

db farm
farm 20: id pk; name name(place); county cat(Adams|Baker|Clark|Dale|Essex); acres int(10,5000); organic bool
crop 12: id pk; name name(crop); family cat(grain|legume|root|fruit|vegetable); days_to_harvest int(40,200)
harvest 260: id pk; farm_id fk(farm); crop_id fk(crop); harvested date(2018,2023); tons real(0.5,900); price_per_ton real(50,900)

db university
campus 4: id pk; name name(place); students int(2000,40000); urban bool
faculty 10: id pk; name name(subject); campus_id fk(campus); building name(place); founded int(1850,2010)
professor 60: id pk; name name(person); faculty_id fk(faculty); rank cat(assistant|associate|full|emeritus); salary int(60000,260000); tenured bool
paper 200: id pk; title name(title); professor_id fk(professor); published date(2005,2023); citations int(0,3000); venue cat(journal|conference|workshop|preprint)

db gym
member 90: id pk; name name(person); joined date(2015,2023); plan cat(basic|plus|premium); age int(16,80)
trainer 15: id pk; name name(person); specialty cat(yoga|strength|cardio|boxing|pilates); rate real(20,120)
class 250: id pk; member_id fk(member); trainer_id fk(trainer); held date(2022,2023); duration int(20,120); attended bool

db election
party 8: id pk; name name(business); founded int(1850,2015); ideology cat(left|center|right|green)
candidate 60: id pk; name name(person); party_id fk(party); age int(25,85); incumbent bool
result 180: id pk; candidate_id fk(candidate); district cat(D1|D2|D3|D4|D5|D6|D7); votes int(100,90000); held date(2000,2022)

db transit
operator 5: id pk; name name(business); public bool; fleet int(20,900)
line 12: id pk; name name(color); operator_id fk(operator); mode cat(bus|tram|metro|ferry); opened date(1960,2022)
stop 80: id pk; name name(street); line_id fk(line); zone int(1,5); accessible bool
ride 400: id pk; stop_id fk(stop); boarded date(2023,2023); passengers int(0,300); fare real(1,6)
";

const FIRST: &[&str] = &[
    "Ada", "Bruno", "Carmen", "Dmitri", "Elena", "Farid", "Greta", "Hiro", "Ines", "Jonas", "Kemi", "Luca", "Maya",
    "Nikos", "Olga", "Pablo", "Quinn", "Rosa", "Sami", "Tara", "Umar", "Vera", "Wen", "Ximena", "Yusuf", "Zoe",
];
const LAST: &[&str] = &[
    "Abbott",
    "Bauer",
    "Castro",
    "Dubois",
    "Eriksen",
    "Fischer",
    "Garcia",
    "Hughes",
    "Ito",
    "Jensen",
    "Kowalski",
    "Lindqvist",
    "Moreau",
    "Novak",
    "Okafor",
    "Petrov",
    "Quintero",
    "Rossi",
    "Sato",
    "Tanaka",
    "Ueda",
    "Vargas",
];
const ADJ: &[&str] = &[
    "Silent", "Golden", "Hidden", "Broken", "Distant", "Crimson", "Quiet", "Wild", "Frozen", "Bright", "Lost", "Last",
    "Secret", "Electric", "Hollow", "Velvet", "Northern", "Paper", "Iron", "Glass",
];
const NOUN: &[&str] = &[
    "River", "Garden", "Empire", "Harbor", "Lantern", "Forest", "Mirror", "Voyage", "Castle", "Orchard", "Signal",
    "Horizon", "Canyon", "Meadow", "Compass", "Tide", "Engine", "Summit", "Island", "Bridge",
];
const PLACE_A: &[&str] =
    &["Ash", "Bel", "Cor", "Dun", "East", "Fair", "Glen", "High", "Kings", "Lake", "Mill", "North"];
const PLACE_B: &[&str] = &["ford", "mont", "wick", "field", "haven", "ton", "brook", "port", "dale", "view", "stead"];

fn name_for(style: &str, rng: &mut ChaCha8Rng) -> String {
    let p = |r: &mut ChaCha8Rng, l: &[&str]| l.choose(r).expect("non-empty").to_string();
    match style {
        "person" => format!("{} {}", p(rng, FIRST), p(rng, LAST)),
        "place" => format!("{}{}", p(rng, PLACE_A), p(rng, PLACE_B)),
        "street" => format!("{} {} Street", rng.gen_range(1..400), p(rng, NOUN)),
        "code" => (0..3).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect(),
        "handle" => format!("{}{}", p(rng, ADJ).to_lowercase(), rng.gen_range(1..999)),
        "color" => format!("{} Line", p(rng, &["Red", "Blue", "Green", "Orange", "Purple", "Silver", "Gold", "Teal"])),
        "business" => format!("{} {}", p(rng, ADJ), p(rng, &["Group", "Partners", "House", "Works", "Union"])),
        _ => format!("{} {}", p(rng, ADJ), p(rng, NOUN)),
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Pk,
    Name(String),
    Cat(Vec<String>),
    Int(i64, i64),
    Real(f64, f64),
    Date(i32, i32),
    Bool,
    Fk(String),
}

#[derive(Debug, Clone)]
struct ColSpec {
    name: String,
    kind: Kind,
    nullable: bool,
}

#[derive(Debug, Clone)]
struct TableSpec {
    name: String,
    rows: usize,
    columns: Vec<ColSpec>,
}

#[derive(Debug, Clone)]
struct DbSpec {
    name: String,
    tables: Vec<TableSpec>,
}

fn parse_kind(s: &str) -> Kind {
    let (head, args) = match s.find('(') {
        Some(i) => (&s[..i], s[i + 1..].trim_end_matches(')')),
        None => (s, ""),
    };
    let nums = |a: &str| -> Vec<f64> { a.split(',').map(|x| x.trim().parse().expect("numeric bound")).collect() };
    match head {
        "pk" => Kind::Pk,
        "name" => Kind::Name(args.to_string()),
        "cat" => Kind::Cat(args.split('|').map(str::to_string).collect()),
        "int" => {
            let n = nums(args);
            Kind::Int(n[0] as i64, n[1] as i64)
        }
        "real" => {
            let n = nums(args);
            Kind::Real(n[0], n[1])
        }
        "date" => {
            let n = nums(args);
            Kind::Date(n[0] as i32, n[1] as i32)
        }
        "bool" => Kind::Bool,
        "fk" => Kind::Fk(args.to_string()),
        other => panic!("unknown column kind '{other}'"),
    }
}

fn parse_specs() -> Vec<DbSpec> {
    let mut out: Vec<DbSpec> = Vec::new();
    for line in SPECS.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(name) = line.strip_prefix("db ") {
            out.push(DbSpec { name: name.to_string(), tables: Vec::new() });
            continue;
        }
        let (head, cols) = line.split_once(':').expect("table line");
        let (tname, rows) = head.split_once(' ').expect("table name and rows");
        let columns = cols
            .split(';')
            .map(|c| {
                let (n, k) = c.trim().split_once(' ').expect("column name and kind");
                let nullable = k.ends_with('?');
                ColSpec { name: n.to_string(), kind: parse_kind(k.trim_end_matches('?')), nullable }
            })
            .collect();
        out.last_mut().expect("db header").tables.push(TableSpec {
            name: tname.to_string(),
            rows: rows.parse().expect("row count"),
            columns,
        });
    }
    out
}

fn ddl(t: &TableSpec) -> String {
    let cols: Vec<String> = t
        .columns
        .iter()
        .map(|c| {
            let ty = match &c.kind {
                Kind::Pk => "INTEGER PRIMARY KEY".to_string(),
                Kind::Name(_) => "TEXT NOT NULL UNIQUE".to_string(),
                Kind::Cat(_) => "TEXT".to_string(),
                Kind::Int(..) => "INTEGER".to_string(),
                Kind::Real(..) => "REAL".to_string(),
                Kind::Date(..) => "DATE".to_string(),
                Kind::Bool => "BOOLEAN".to_string(),
                Kind::Fk(target) => format!("INTEGER REFERENCES {}(id)", quote_ident(target)),
            };
            format!("{} {ty}", quote_ident(&c.name))
        })
        .collect();
    format!("CREATE TABLE {} ({})", quote_ident(&t.name), cols.join(", "))
}

fn value(
    c: &ColSpec,
    row: usize,
    rng: &mut ChaCha8Rng,
    sizes: &[(String, usize)],
    used: &mut Vec<String>,
) -> rusqlite::types::Value {
    use rusqlite::types::Value;
    if c.nullable && rng.gen_bool(0.1) {
        return Value::Null;
    }
    match &c.kind {
        Kind::Pk => Value::Integer(row as i64 + 1),
        Kind::Name(style) => {
            let mut n = name_for(style, rng);
            let mut tries = 0;
            while used.contains(&n) {
                tries += 1;
                n = if tries < 8 { name_for(style, rng) } else { format!("{} {}", name_for(style, rng), row + 1) };
            }
            used.push(n.clone());
            Value::Text(n)
        }
        Kind::Cat(options) => Value::Text(options.choose(rng).expect("options").clone()),
        Kind::Int(lo, hi) => Value::Integer(rng.gen_range(*lo..=*hi)),
        Kind::Real(lo, hi) => Value::Real((rng.gen_range(*lo..=*hi) * 100.0).round() / 100.0),
        Kind::Date(y0, y1) => Value::Text(format!(
            "{:04}-{:02}-{:02}",
            rng.gen_range(*y0..=*y1),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28)
        )),
        Kind::Bool => Value::Integer(rng.gen_range(0..=1)),
        Kind::Fk(target) => {
            let n = sizes.iter().find(|(t, _)| t == target).map(|(_, n)| *n).expect("fk target defined earlier");
            Value::Integer(rng.gen_range(1..=n as i64))
        }
    }
}

fn build_spec(spec: &DbSpec, path: &Path, seed: u64) -> rusqlite::Result<()> {
    let mut conn = Connection::open(path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tx = conn.transaction()?;
    let mut sizes: Vec<(String, usize)> = Vec::new();
    for t in &spec.tables {
        tx.execute_batch(&ddl(t))?;
        let placeholders = vec!["?"; t.columns.len()].join(", ");
        let insert = format!("INSERT INTO {} VALUES ({placeholders})", quote_ident(&t.name));
        let mut used: Vec<Vec<String>> = vec![Vec::new(); t.columns.len()];
        {
            let mut stmt = tx.prepare(&insert)?;
            for row in 0..t.rows {
                let vals: Vec<rusqlite::types::Value> =
                    t.columns.iter().enumerate().map(|(i, c)| value(c, row, &mut rng, &sizes, &mut used[i])).collect();
                stmt.execute(params_from_iter(vals))?;
            }
        }
        sizes.push((t.name.clone(), t.rows));
    }
    tx.commit()
}

/// Names of the synthetic sample databases (without the song database).
pub fn sample_names() -> Vec<String> {
    parse_specs().into_iter().map(|s| s.name).collect()
}

/// Write the song database to `path` (replacing any existing file).
pub fn write_song_database(path: &Path) -> rusqlite::Result<()> {
    let _ = std::fs::remove_file(path);
    let conn = Connection::open(path)?;
    conn.execute_batch(SONG_SQL)
}

/// Write every sample database into `dir` as `<name>.sqlite`, song first.
pub fn write_sample_databases(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let to_io = |e: rusqlite::Error| std::io::Error::other(e.to_string());
    let mut out = Vec::new();
    let song = dir.join("music.sqlite");
    write_song_database(&song).map_err(to_io)?;
    out.push(song);
    for (i, spec) in parse_specs().iter().enumerate() {
        let path = dir.join(format!("{}.sqlite", spec.name));
        let _ = std::fs::remove_file(&path);
        build_spec(spec, &path, 0x5eed_0000 + i as u64).map_err(to_io)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse() {
        let specs = parse_specs();
        assert!(specs.len() >= 22);
        for s in &specs {
            assert!(s.tables.len() >= 2, "{}", s.name);
        }
    }
}
